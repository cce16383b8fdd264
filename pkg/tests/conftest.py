import numpy as np
import pytest

from sparsecrf.field import ImageGrid, ScribbleMask, FOREGROUND, BACKGROUND


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile the numba kernels once so timed tests measure the algorithms."""
    from sparsecrf.pipeline import RunConfig, segment
    from sparsecrf.mincut import st_min_cut

    rng = np.random.default_rng(0)
    img = ImageGrid.from_array(rng.random((8, 8, 1)))
    scr = np.zeros((8, 8), dtype=np.uint8)
    scr[1, 1] = FOREGROUND
    scr[6, 6] = BACKGROUND
    segment(img, ScribbleMask(8, 8, scr),
            RunConfig(q=8, bins=4, window=3, degree=4.0, seed=0))
    st_min_cut(3, [(0, 1), (1, 2)], [1.0, 1.0], 0, 2)


@pytest.fixture
def random_image():
    def make(h=8, w=8, channels=1, seed=0):
        rng = np.random.default_rng(seed)
        return ImageGrid.from_array(rng.random((h, w, channels)))
    return make


@pytest.fixture
def basic_scribbles():
    def make(h, w, fg=((1, 1),), bg=((0, 0),)):
        labels = np.zeros((h, w), dtype=np.uint8)
        for r, c in fg:
            labels[r, c] = FOREGROUND
        for r, c in bg:
            labels[r, c] = BACKGROUND
        return ScribbleMask(w, h, labels)
    return make
