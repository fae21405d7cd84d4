"""Centered orthonormal FFTs, coil combination, and pseudo data consistency."""

from __future__ import annotations

import numpy as np

_AXES = (-2, -1)


def fft2c(img: np.ndarray) -> np.ndarray:
    """Centered orthonormal 2D DFT over the trailing two axes (DC at [H//2, W//2])."""
    return np.fft.fftshift(np.fft.fft2(np.fft.ifftshift(img, axes=_AXES), norm="ortho"), axes=_AXES)


def ifft2c(ksp: np.ndarray) -> np.ndarray:
    """Inverse of :func:`fft2c`."""
    return np.fft.fftshift(np.fft.ifft2(np.fft.ifftshift(ksp, axes=_AXES), norm="ortho"), axes=_AXES)


def rss_combine(coil_images: np.ndarray) -> np.ndarray:
    """Root-sum-of-squares magnitude over the leading coil axis."""
    if coil_images.ndim < 3:
        raise ValueError("expected [C, ..., H, W] coil images")
    return np.sqrt(np.sum(np.abs(coil_images) ** 2, axis=0))


def _mask_pattern(mask, n_frames: int, height: int) -> np.ndarray:
    pattern = np.asarray(getattr(mask, "pattern", mask))
    if pattern.shape != (n_frames, height):
        raise ValueError(f"mask pattern shape {pattern.shape} does not match video [T={n_frames}, H={height}]")
    return pattern.astype(bool)


def kspace_replace(enhanced: np.ndarray, dlrecon: np.ndarray, mask) -> np.ndarray:
    """Merge spectra: sampled phase-encode lines from `dlrecon`, the rest from `enhanced`.

    Returns the complex per-frame image whose spectrum equals the merged
    k-space exactly, i.e. the value before the realness projection of
    :func:`pseudo_dc`.
    """
    enhanced = np.asarray(enhanced)
    dlrecon = np.asarray(dlrecon)
    if enhanced.shape != dlrecon.shape or enhanced.ndim != 3:
        raise ValueError("enhanced and dlrecon must both be [T, H, W]")
    if np.iscomplexobj(enhanced) or np.iscomplexobj(dlrecon):
        raise TypeError("pseudo DC operates on magnitude (real) videos")
    pattern = _mask_pattern(mask, *enhanced.shape[:2])
    merged = np.where(pattern[:, :, None], fft2c(dlrecon), fft2c(enhanced))
    return ifft2c(merged)


def pseudo_dc(enhanced: np.ndarray, dlrecon: np.ndarray, mask, return_merged: bool = False):
    """Replace the sampled k-space region of `enhanced` with `dlrecon`'s.

    The merged spectrum is generally not conjugate-symmetric, so the result
    is projected back to the magnitude domain by taking the real part and
    clamping at zero. With ``return_merged=True`` the complex pre-projection
    image is returned alongside; its spectrum carries `dlrecon`'s sampled
    lines exactly.
    """
    merged = kspace_replace(enhanced, dlrecon, mask)
    out = np.maximum(merged.real, 0.0)
    if return_merged:
        return out, merged
    return out
