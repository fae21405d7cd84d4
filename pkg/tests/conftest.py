import numpy as np
import pytest

from cinediff.initialrecon import view_share
from cinediff.phantom import (
    PhantomConfig,
    generate_coils,
    generate_mask,
    generate_phantom,
    simulate_kspace,
)

_ACCEPTANCE: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call":
        if report.skipped:
            _ACCEPTANCE[name] = "SKIP"
        else:
            _ACCEPTANCE[name] = "PASS" if report.passed else "FAIL"
    elif report.when == "setup" and not report.passed:
        _ACCEPTANCE[name] = "SKIP" if report.skipped else "FAIL"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _ACCEPTANCE.items():
        terminalreporter.write_line(f"[ACCEPTANCE] {outcome} {name}")


@pytest.fixture(scope="session")
def coils64():
    return generate_coils(64, 64, 8, seed=0)


@pytest.fixture(scope="session")
def mask_r8():
    return generate_mask(25, 64, 8, 4, "lattice", seed=0)


def _build(cfg, coils, mask):
    gt = generate_phantom(cfg).astype(np.float64)
    ksp = simulate_kspace(gt, coils, mask, noise_sigma=0.0, seed=cfg.seed)
    return {"cfg": cfg, "gt": gt, "ksp": ksp, "dlrecon": view_share(ksp, 4), "mask": mask}


@pytest.fixture(scope="session")
def moving(coils64, mask_r8):
    """25-phase beating phantom, lattice R=8, noiseless, view-share recon."""
    return _build(PhantomConfig(), coils64, mask_r8)


@pytest.fixture(scope="session")
def static(coils64, mask_r8):
    """Same acquisition with the motion switched off (view-share is exact here)."""
    return _build(PhantomConfig(cycle_amplitude=0.0), coils64, mask_r8)
