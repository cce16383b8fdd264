"""End-to-end segmentation runs: configuration, orchestration, reports.

A run goes: neighborhood statistics -> abstraction clustering ->
gamma calibration -> stochastic clique sampling -> unary model from
scribbles -> energy assembly -> s-t min-cut -> mask + report. Statistics
and clustering depend only on the image and the structural parameters,
so callers (the session service) may precompute and reuse them across
scribble refinements.
"""

import time
from dataclasses import dataclass, fields, replace

import numpy as np

from . import cliques as cl
from . import energy as en
from . import mincut
from .divergence import BREGMAN, HELLINGER, KL, LITERAL, SIMILARITY, DivergenceKind
from .field import (DIRAC, HISTOGRAM, ImageGrid, MaskMeta, ScribbleMask,
                    SegmentationMask, compute_encoded_stats, local_pairs,
                    node_positions)


class ConfigError(ValueError):
    """A run configuration value is out of contract."""


@dataclass(frozen=True)
class RunConfig:
    """All knobs of a segmentation run.

    Defaults follow the engine's reference configuration where one is
    stated (5x5 statistics window, 30 long-range cliques per node,
    q = 500 abstraction sets); the rest are documented engineering
    defaults.
    """

    divergence: str = KL
    tau: float = 1.0
    mode: str = SIMILARITY
    window: int = 5
    bins: int = 16
    q: int = 500
    degree: float = 30.0
    sigma: float = 1.0
    beta: float = 1.0
    lambda_local: float = 1.0
    lambda_long: float = 1.0
    epsilon: float = 0.1
    seed: int = 0
    stats_kind: str = "auto"  # auto | histogram | dirac
    sigma_in_exponent: bool = False

    def __post_init__(self):
        if self.divergence not in (BREGMAN, KL, HELLINGER):
            raise ConfigError(f"unknown divergence {self.divergence!r}")
        if self.mode not in (SIMILARITY, LITERAL):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.tau <= 0:
            raise ConfigError("tau must be positive")
        if self.window < 1 or self.window % 2 == 0:
            raise ConfigError("window must be odd and >= 1")
        if self.bins < 2:
            raise ConfigError("bins must be >= 2")
        if self.q < 1:
            raise ConfigError("q must be >= 1")
        if self.degree < 0:
            raise ConfigError("degree must be >= 0")
        if self.sigma <= 0:
            raise ConfigError("sigma must be positive")
        if self.lambda_local < 0 or self.lambda_long < 0:
            raise ConfigError("lambda weights must be non-negative")
        if not (0 < self.epsilon <= 1):
            raise ConfigError("epsilon must be in (0, 1]")
        if self.stats_kind not in ("auto", HISTOGRAM, DIRAC):
            raise ConfigError(f"unknown stats kind {self.stats_kind!r}")

    @property
    def divergence_kind(self) -> DivergenceKind:
        return DivergenceKind(self.divergence, self.tau, self.mode)

    @property
    def effective_stats_kind(self) -> str:
        if self.stats_kind != "auto":
            return self.stats_kind
        return self.divergence_kind.stats_kind


_BOOL_STRINGS = {"true": True, "1": True, "yes": True,
                 "false": False, "0": False, "no": False}


def config_from_mapping(values: dict, base: RunConfig | None = None) -> RunConfig:
    """Build a RunConfig from string/typed key-value overrides."""
    cfg = base or RunConfig()
    known = {f.name: f.type for f in fields(RunConfig)}
    updates = {}
    for key, raw in values.items():
        key = key.strip().replace("-", "_")
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
        current = getattr(cfg, key)
        if isinstance(raw, str):
            raw = raw.strip()
            try:
                if isinstance(current, bool):
                    raw = _BOOL_STRINGS[raw.lower()]
                elif isinstance(current, int):
                    raw = int(raw)
                elif isinstance(current, float):
                    raw = float(raw)
            except (KeyError, ValueError) as exc:
                raise ConfigError(f"bad value for {key}: {raw!r}") from exc
        updates[key] = raw
    return replace(cfg, **updates)


def load_config_file(path, base: RunConfig | None = None) -> RunConfig:
    """Parse a `key = value` text file (# starts a comment)."""
    values = {}
    with open(path) as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{line_no}: expected key = value")
            key, val = line.split("=", 1)
            values[key] = val
    return config_from_mapping(values, base)


@dataclass
class RunReport:
    energy: float
    edges: int
    gamma: float
    degree: "cl.DegreeReport"
    timings_ms: dict
    config: RunConfig
    seed: int
    cluster_objective: float = float("nan")

    def to_dict(self) -> dict:
        d = vars(self.degree)
        return {
            "energy": self.energy,
            "edges": self.edges,
            "gamma": self.gamma,
            "degree": {k: (bool(v) if isinstance(v, (bool, np.bool_)) else v)
                       for k, v in d.items()},
            "timings_ms": self.timings_ms,
            "seed": self.seed,
            "cluster_objective": self.cluster_objective,
            "config": {f.name: getattr(self.config, f.name)
                       for f in fields(RunConfig)},
        }


@dataclass
class PrecomputedState:
    """Image-only artifacts reusable across scribble refinements."""

    stats: object
    positions: np.ndarray
    model: cl.ClusterModel | None
    local: np.ndarray
    stats_ms: float
    cluster_ms: float


def precompute(img: ImageGrid, cfg: RunConfig) -> PrecomputedState:
    t0 = time.perf_counter()
    stats = compute_encoded_stats(img, cfg.window, cfg.effective_stats_kind,
                                  cfg.bins)
    t1 = time.perf_counter()
    positions = node_positions(img)
    model = None
    if cfg.degree > 0:
        q = min(cfg.q, img.n_nodes)
        model = cl.cluster_nodes(stats, positions, q, seed=cfg.seed)
    t2 = time.perf_counter()
    return PrecomputedState(stats=stats, positions=positions, model=model,
                            local=local_pairs(img),
                            stats_ms=(t1 - t0) * 1e3,
                            cluster_ms=(t2 - t1) * 1e3)


def segment(img: ImageGrid, scribbles: ScribbleMask, cfg: RunConfig,
            pre: PrecomputedState | None = None,
            sample_seed: int | None = None
            ) -> tuple[SegmentationMask, RunReport]:
    """Run the full pipeline; deterministic for fixed (inputs, config, seed)."""
    if scribbles.width != img.width or scribbles.height != img.height:
        raise ValueError("scribble dimensions do not match the image")
    if not scribbles.has_both_classes():
        raise en.MissingSeedsError(
            "need at least one foreground and one background scribble")

    timings = {}
    if pre is None or (cfg.degree > 0 and pre.model is None):
        pre = precompute(img, cfg)
    timings["stats_ms"] = pre.stats_ms
    timings["cluster_ms"] = pre.cluster_ms

    div = cfg.divergence_kind
    seed = cfg.seed if sample_seed is None else sample_seed
    t0 = time.perf_counter()
    if cfg.degree > 0:
        gamma = cl.calibrate_gamma(pre.model, div, cfg.degree,
                                   exclude_pairs=pre.local)
        t1 = time.perf_counter()
        cs = cl.sample_cliques(pre.model, div, gamma, seed,
                               exclude_pairs=pre.local,
                               expected_degree_target=cfg.degree)
    else:
        gamma = float("inf")
        t1 = time.perf_counter()
        cs = cl.CliqueSet(long_range=np.zeros((0, 2), dtype=np.int64),
                          F=np.zeros(0), gamma=gamma, seed=seed,
                          expected_degree_target=0.0)
    t2 = time.perf_counter()
    timings["calibrate_ms"] = (t1 - t0) * 1e3
    timings["sample_ms"] = (t2 - t1) * 1e3

    appearance = en.fit_appearance_model(img, scribbles, cfg.bins)
    unary = en.unary_potentials(img, appearance, scribbles)
    em = en.build_energy_model(
        img, unary, pre.local, cs.long_range,
        sigma=cfg.sigma, beta=cfg.beta,
        lambda_local=cfg.lambda_local, lambda_long=cfg.lambda_long,
        sigma_in_exponent=cfg.sigma_in_exponent,
    )
    t3 = time.perf_counter()
    timings["energy_ms"] = (t3 - t2) * 1e3

    labels, e_value = mincut.solve_labels(em)
    t4 = time.perf_counter()
    timings["flow_ms"] = (t4 - t3) * 1e3
    timings["total_ms"] = sum(timings.values())

    mask = SegmentationMask(
        width=img.width, height=img.height,
        labels=labels.reshape(img.height, img.width),
        meta=MaskMeta(seed=seed, gamma=gamma, divergence=cfg.divergence,
                      expected_degree=cfg.degree),
    )
    report = RunReport(
        energy=e_value, edges=cs.m, gamma=gamma,
        degree=cl.degree_report(cs, img.n_nodes, cfg.epsilon),
        timings_ms=timings, config=cfg, seed=seed,
        cluster_objective=(pre.model.objective if pre.model is not None
                           else float("nan")),
    )
    return mask, report
