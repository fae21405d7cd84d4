"""Deterministic, order-independent random substreams.

Every stochastic draw in the pipeline (k-space noise, diffusion start noise,
ancestral step noise, random mask lines) comes from its own counter-based
Philox stream keyed by the user seed plus a structural address (a domain tag
and integer indices). Results are therefore independent of evaluation order
and worker thread count.
"""

from __future__ import annotations

import numpy as np

# Domain tags keep substreams for unrelated purposes disjoint even when their
# structural indices collide.
PHANTOM_GEOMETRY = 1
COIL_PHASE = 2
MASK_LINES = 3
KSPACE_NOISE = 4
DIFFUSION_START = 5
DIFFUSION_STEP = 6
WEIGHT_INIT = 7


def substream(seed: int, domain: int, *address: int) -> np.random.Generator:
    """Generator for the (domain, *address) substream of `seed`."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(domain), *(int(a) for a in address)))
    return np.random.Generator(np.random.Philox(ss))


def complex_normal(rng: np.random.Generator, shape, sigma: float) -> np.ndarray:
    """Circular complex Gaussian with E|z|^2 = sigma^2 (sigma/sqrt(2) per component)."""
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return (sigma / np.sqrt(2.0)) * (re + 1j * im)
