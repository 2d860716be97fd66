"""Shared helpers for the test suite: seeded random fields and error metrics."""

import numpy as np

from sqglab.spectral import Grid2, SpectralField, dealias


def rel_err(a, b):
    denom = max(abs(float(b)), 1e-300)
    return abs(float(a) - float(b)) / denom


def random_field(grid: Grid2, rng, band_limited=True, envelope=None) -> SpectralField:
    """Mean-zero real random field with an optional radial spectral envelope.

    White noise is sampled in physical space so conjugate symmetry holds by
    construction; the envelope multiplies the coefficients afterwards.
    """
    data = rng.standard_normal((grid.n, grid.n))
    f = SpectralField.from_physical(grid, data)
    coef = f.coef.copy()
    if envelope is not None:
        coef = coef * envelope(grid.kabs)
    coef[0, 0] = 0.0
    f = SpectralField(grid, coef, real=True)
    if band_limited:
        f = dealias(f)
    return f


def ball_limited_field(grid: Grid2, rng, radius: float) -> SpectralField:
    """Random field with spectrum confined to the ball |k| <= radius."""
    f = random_field(grid, rng, band_limited=False)
    coef = f.coef * (grid.kabs <= radius)
    return SpectralField(grid, coef, real=True)


def pure_mode(grid: Grid2, m1: int, m2: int, amplitude=1.0) -> SpectralField:
    """Exact cosine mode amplitude * cos(k . x) built in coefficient space."""
    coef = np.zeros((grid.n, grid.n), dtype=np.complex128)
    half = amplitude * grid.n**2 / 2.0
    coef[m1 % grid.n, m2 % grid.n] += half
    coef[-m1 % grid.n, -m2 % grid.n] += half
    return SpectralField(grid, coef, real=True)


def smooth_profile(grid: Grid2, amp=0.05) -> SpectralField:
    """Deterministic smooth data: two low modes plus a mid-frequency ripple."""
    x1, x2 = grid.x1, grid.x2
    vals = amp * (
        np.cos(2 * x1) * np.sin(x2)
        + 0.5 * np.sin(x1 + 3 * x2)
        + 0.25 * np.cos(5 * x1 - 2 * x2)
    )
    return SpectralField.from_physical(grid, vals)
