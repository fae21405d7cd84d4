import numpy as np
import pytest

from cinetrain.formats import write_tensor


def _make_video(t: int, hw: int, gen: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Smooth bump orbiting the frame center; dlrecon is a lightly perturbed copy."""
    yy, xx = np.mgrid[0:hw, 0:hw].astype(np.float64)
    phase = gen.uniform(0.0, 2.0 * np.pi)
    ang = 2.0 * np.pi * np.arange(t) / t + phase
    cx = hw / 2.0 + 0.2 * hw * np.cos(ang)
    cy = hw / 2.0 + 0.2 * hw * np.sin(ang)
    r2 = (xx[None] - cx[:, None, None]) ** 2 + (yy[None] - cy[:, None, None]) ** 2
    gt = np.exp(-r2 / (0.02 * hw * hw))
    dl = np.clip(gt + 0.03 * gen.standard_normal((1, hw, hw)), 0.0, None)
    return gt.astype(np.float32), dl.astype(np.float32)


def _write_dataset(root, n: int, t: int = 6, hw: int = 20, seed: int = 0) -> None:
    gen = np.random.default_rng(seed)
    for i in range(n):
        d = root / f"run_{i:02d}"
        d.mkdir(parents=True)
        gt, dl = _make_video(t, hw, gen)
        write_tensor(d / "gt.ctns", gt)
        write_tensor(d / "dlrecon.ctns", dl)


@pytest.fixture(scope="session")
def video_factory():
    """Writer for synthetic gt/dlrecon run directories: (root, n, ...) -> None."""
    return _write_dataset


@pytest.fixture(scope="session")
def dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("videos")
    _write_dataset(root, n=21)
    return root
