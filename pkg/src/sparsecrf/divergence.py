"""Connectivity measures between encoded node statistics.

Three realizations: squared-norm Bregman divergence (which is plain
squared Euclidean distance for phi = ||.||^2), discrete KL divergence,
and the Hellinger-style sum (1/sqrt(2)) * sum (sqrt(b) - sqrt(a))^2 --
kept without the classical outer square root, matching the formulation
this engine is built around. Divergences over multi-channel histograms
are computed per channel and summed, which the concatenated-bin layout
gives for free.

A divergence D is turned into a connectivity value F either by the
similarity transform exp(-D/tau) (default: similar nodes connect more)
or literally (F = D, dissimilar nodes connect more).
"""

from dataclasses import dataclass

import numpy as np

from .field import DIRAC, HISTOGRAM, EncodedStats, StatsField
from ._kernels import pairwise_dots

BREGMAN = "bregman"
KL = "kl"
HELLINGER = "hellinger"

SIMILARITY = "similarity"
LITERAL = "literal"


class IncompatibleStatsError(ValueError):
    """The two statistics cannot be compared (kind or dimension mismatch)."""


@dataclass(frozen=True)
class DivergenceKind:
    """A divergence choice plus its similarity temperature and mode."""

    kind: str = KL
    tau: float = 1.0
    mode: str = SIMILARITY

    def __post_init__(self):
        if self.kind not in (BREGMAN, KL, HELLINGER):
            raise ValueError(f"unknown divergence {self.kind!r}")
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.mode not in (SIMILARITY, LITERAL):
            raise ValueError(f"unknown connectivity mode {self.mode!r}")

    @property
    def stats_kind(self) -> str:
        """Statistic encoding this divergence runs on by default."""
        return DIRAC if self.kind == BREGMAN else HISTOGRAM


def _check_pair(Si: EncodedStats, Sj: EncodedStats):
    if Si.kind != Sj.kind or Si.values.shape != Sj.values.shape:
        raise IncompatibleStatsError(
            f"stats mismatch: {Si.kind}/{Si.values.shape} vs "
            f"{Sj.kind}/{Sj.values.shape}"
        )


def bregman_sqnorm(Si: EncodedStats, Sj: EncodedStats) -> float:
    """Bregman divergence with phi(v)=||v||^2: squared Euclidean distance."""
    _check_pair(Si, Sj)
    d = Si.values - Sj.values
    return float(np.dot(d, d))


def kl(Si: EncodedStats, Sj: EncodedStats) -> float:
    """Discrete KL divergence sum_l s_i,l * ln(s_i,l / s_j,l)."""
    _check_pair(Si, Sj)
    if Si.kind != HISTOGRAM:
        raise IncompatibleStatsError("KL divergence needs histogram statistics")
    a, b = Si.values, Sj.values
    if a.min() <= 0 or b.min() <= 0:
        raise ValueError("KL needs strictly positive bins (smoothing skipped?)")
    return float(np.sum(a * np.log(a / b)))


def hellinger(Si: EncodedStats, Sj: EncodedStats) -> float:
    """(1/sqrt(2)) * sum_l (sqrt(s_j,l) - sqrt(s_i,l))^2."""
    _check_pair(Si, Sj)
    if Si.kind != HISTOGRAM:
        raise IncompatibleStatsError("Hellinger needs histogram statistics")
    a, b = Si.values, Sj.values
    if a.min() < 0 or b.min() < 0:
        raise ValueError("Hellinger needs non-negative bins")
    return float(np.sum((np.sqrt(b) - np.sqrt(a)) ** 2) / np.sqrt(2.0))


_PAIRWISE = {BREGMAN: bregman_sqnorm, KL: kl, HELLINGER: hellinger}


def divergence(div: DivergenceKind, Si: EncodedStats, Sj: EncodedStats) -> float:
    return _PAIRWISE[div.kind](Si, Sj)


def connectivity(D, tau: float = 1.0, mode: str = SIMILARITY):
    """Map divergence(s) D >= 0 to connectivity F.

    Similarity mode: F = exp(-D/tau), strictly decreasing, range (0, 1].
    Literal mode: F = D unchanged.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    if np.any(np.asarray(D) < 0):
        raise ValueError("divergence must be non-negative")
    if mode == SIMILARITY:
        return np.exp(-np.asarray(D, dtype=np.float64) / tau)
    if mode == LITERAL:
        return np.asarray(D, dtype=np.float64) + 0.0
    raise ValueError(f"unknown connectivity mode {mode!r}")


def pair_connectivity(div: DivergenceKind, Si: EncodedStats, Sj: EncodedStats) -> float:
    return float(connectivity(divergence(div, Si, Sj), div.tau, div.mode))


def divergence_matrix(div: DivergenceKind, stats: StatsField,
                      refs: np.ndarray) -> np.ndarray:
    """Divergence of every node statistic against every reference row.

    refs has shape (q, dim); rows are typically cluster centroids. The
    computation reduces each divergence to row dot products so the only
    O(n*q*dim) work runs in one serial kernel.
    """
    S = np.ascontiguousarray(stats.values)
    M = np.ascontiguousarray(refs, dtype=np.float64)
    if M.shape[1] != S.shape[1]:
        raise IncompatibleStatsError("reference dimension mismatch")
    if div.kind == BREGMAN:
        dots = pairwise_dots(S, M)
        ss = np.sum(S * S, axis=1)
        mm = np.sum(M * M, axis=1)
        D = ss[:, None] + mm[None, :] - 2.0 * dots
    elif div.kind == KL:
        if stats.kind != HISTOGRAM:
            raise IncompatibleStatsError("KL divergence needs histogram statistics")
        if S.min() <= 0 or M.min() <= 0:
            raise ValueError("KL needs strictly positive bins")
        self_term = np.sum(S * np.log(S), axis=1)
        cross = pairwise_dots(S, np.ascontiguousarray(np.log(M)))
        D = self_term[:, None] - cross
    else:  # hellinger
        if stats.kind != HISTOGRAM:
            raise IncompatibleStatsError("Hellinger needs histogram statistics")
        rS = np.sqrt(S)
        rM = np.sqrt(M)
        dots = pairwise_dots(rS, np.ascontiguousarray(rM))
        D = (np.sum(S, axis=1)[:, None] + np.sum(M, axis=1)[None, :]
             - 2.0 * dots) / np.sqrt(2.0)
    return np.maximum(D, 0.0)


def connectivity_matrix(div: DivergenceKind, stats: StatsField,
                        refs: np.ndarray) -> np.ndarray:
    return connectivity(divergence_matrix(div, stats, refs), div.tau, div.mode)
