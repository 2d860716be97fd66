"""Fourier-side fields and diagonal multiplier calculus on a periodic box.

Fields live on a uniform n-by-n grid over [0, L)^2.  Coefficients follow the
numpy ``fft2`` layout: integer frequency indices run over [-n/2, n/2) per
axis and the physical wavenumber of index m is k = (2*pi/L) * m.  Every
operator in this module is a diagonal multiplier on those coefficients;
pointwise products of fields are formed in physical space by the callers
that need them, normally followed by :func:`dealias`.

Conventions kept throughout the package:

* axis 0 of an array is the x1 direction, axis 1 is x2,
* perp gradient is (-d/dx2, d/dx1),
* Lambda = (-Laplacian)^(1/2) has symbol |k|, with the k = 0 coefficient
  mapped to zero by every negative-order multiplier.
"""

from __future__ import annotations

import functools
import math

import numpy as np


class ParameterError(ValueError):
    """An argument fell outside the supported parameter range."""


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha <= 2.0:
        raise ParameterError(f"dissipation order alpha must lie in (0, 2], got {alpha}")
    return alpha


class Grid2:
    """Uniform periodic grid on [0, box_length)^2 and its frequency lattice.

    Parameters
    ----------
    n : int
        Samples per axis.  Must be a power of two, at least 16, so that
        dyadic frequency decompositions nest cleanly.
    box_length : float
        Side length L of the periodic box.
    """

    def __init__(self, n: int, box_length: float = 2.0 * math.pi):
        n = int(n)
        if n < 16 or (n & (n - 1)) != 0:
            raise ParameterError(f"grid size must be a power of two >= 16, got {n}")
        box_length = float(box_length)
        if not box_length > 0.0 or not math.isfinite(box_length):
            raise ParameterError(f"box_length must be positive, got {box_length}")
        self.n = n
        self.box_length = box_length

        idx = np.fft.fftfreq(n, d=1.0 / n).astype(np.int64)
        self.index1 = np.broadcast_to(idx[:, None], (n, n))
        self.index2 = np.broadcast_to(idx[None, :], (n, n))
        unit = 2.0 * math.pi / box_length
        self.k1 = unit * self.index1
        self.k2 = unit * self.index2
        self.kabs = np.hypot(self.k1, self.k2)

        x = box_length * np.arange(n) / n
        self.x1 = np.broadcast_to(x[:, None], (n, n))
        self.x2 = np.broadcast_to(x[None, :], (n, n))

        # 2/3-rule mask: keep integer indices with max(|m1|, |m2|) <= n//3.
        # Every lattice point of radius <= unit*n/3 satisfies that bound,
        # so the retained square contains the full radial ball used by the
        # dyadic machinery.
        m_cut = n // 3
        self.dealias_keep = (np.abs(self.index1) <= m_cut) & (np.abs(self.index2) <= m_cut)
        self.dealias_cutoff = unit * (n / 3.0)
        self.cell_area = (box_length / n) ** 2

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Grid2)
            and other.n == self.n
            and other.box_length == self.box_length
        )

    def __hash__(self):
        return hash((self.n, self.box_length))

    def __repr__(self) -> str:
        return f"Grid2(n={self.n}, box_length={self.box_length!r})"


@functools.lru_cache(maxsize=32)
def shared_grid(n: int, box_length: float = 2.0 * math.pi) -> Grid2:
    """Memoized grid factory; instances compare equal by (n, box_length)."""
    return Grid2(n, box_length)


class SpectralField:
    """Scalar field on a :class:`Grid2`, stored by its fft2 coefficients."""

    __slots__ = ("grid", "coef", "real")

    def __init__(self, grid: Grid2, coef: np.ndarray, real: bool = True):
        if coef.shape != (grid.n, grid.n):
            raise ParameterError(
                f"coefficient array shape {coef.shape} does not match grid n={grid.n}"
            )
        self.grid = grid
        self.coef = np.asarray(coef, dtype=np.complex128)
        self.real = bool(real)

    @classmethod
    def from_physical(cls, grid: Grid2, values: np.ndarray) -> "SpectralField":
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (grid.n, grid.n):
            raise ParameterError(
                f"value array shape {values.shape} does not match grid n={grid.n}"
            )
        return cls(grid, np.fft.fft2(values), real=True)

    @classmethod
    def from_coefficients(
        cls, grid: Grid2, coef: np.ndarray, real: bool = True
    ) -> "SpectralField":
        return cls(grid, np.array(coef, dtype=np.complex128, copy=True), real=real)

    def physical(self) -> np.ndarray:
        w = np.fft.ifft2(self.coef)
        return w.real if self.real else w

    def copy(self) -> "SpectralField":
        return SpectralField(self.grid, self.coef.copy(), real=self.real)

    def mean(self) -> float:
        """Average of the field over the box (the k = 0 amplitude)."""
        m = self.coef[0, 0] / self.grid.n**2
        return m.real if self.real else m

    def conjugate_symmetry_defect(self) -> float:
        """Relative departure from c(-k) = conj(c(k))."""
        c = self.coef
        mirrored = np.roll(c[::-1, ::-1], 1, axis=(0, 1))
        scale = np.abs(c).max()
        if scale == 0.0:
            return 0.0
        return float(np.abs(c - np.conj(mirrored)).max() / scale)

    # Linear-space arithmetic; products belong to physical space.
    def __add__(self, other: "SpectralField") -> "SpectralField":
        self._check_same_grid(other)
        return SpectralField(self.grid, self.coef + other.coef, real=self.real and other.real)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        self._check_same_grid(other)
        return SpectralField(self.grid, self.coef - other.coef, real=self.real and other.real)

    def __mul__(self, scalar: float) -> "SpectralField":
        return SpectralField(self.grid, self.coef * scalar, real=self.real and not isinstance(scalar, complex))

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralField":
        return SpectralField(self.grid, -self.coef, real=self.real)

    def _check_same_grid(self, other: "SpectralField") -> None:
        if self.grid != other.grid:
            raise ParameterError("fields live on different grids")


_SYMBOL_KINDS = (
    "fractional_laplacian",
    "inverse_lambda",
    "gradient",
    "riesz_perp",
    "semigroup",
)


class SymbolOp:
    """Precomputed diagonal Fourier multiplier.

    kind selects the symbol:

    ``fractional_laplacian``  |k|^alpha            (params: alpha)
    ``inverse_lambda``        1/|k|, 0 at k = 0
    ``gradient``              i*k_axis             (params: axis in {0, 1})
    ``riesz_perp``            i*kperp_axis/|k|, 0 at k = 0   (params: axis)
    ``semigroup``             exp(-t*|k|^alpha)    (params: alpha, t >= 0)

    Negative-order symbols (inverse_lambda, riesz_perp) send the mean mode
    to zero; that is the only sane convention on the torus, where Lambda
    annihilates constants.
    """

    def __init__(self, grid: Grid2, kind: str, **params):
        if kind not in _SYMBOL_KINDS:
            raise ParameterError(f"unknown symbol kind {kind!r}")
        self.grid = grid
        self.kind = kind
        self.params = dict(params)
        self.symbol = self._build(grid, kind, params)

    @staticmethod
    def _build(grid: Grid2, kind: str, params) -> np.ndarray:
        kabs = grid.kabs
        if kind == "fractional_laplacian":
            alpha = _check_alpha(params["alpha"])
            return kabs**alpha
        if kind == "inverse_lambda":
            with np.errstate(divide="ignore"):
                sym = np.where(kabs > 0.0, 1.0 / np.where(kabs > 0.0, kabs, 1.0), 0.0)
            return sym
        if kind == "gradient":
            axis = params["axis"]
            if axis not in (0, 1):
                raise ParameterError(f"gradient axis must be 0 or 1, got {axis}")
            return 1j * (grid.k1 if axis == 0 else grid.k2)
        if kind == "riesz_perp":
            axis = params["axis"]
            if axis not in (0, 1):
                raise ParameterError(f"riesz_perp axis must be 0 or 1, got {axis}")
            kperp = -grid.k2 if axis == 0 else grid.k1
            safe = np.where(kabs > 0.0, kabs, 1.0)
            return np.where(kabs > 0.0, 1j * kperp / safe, 0.0)
        # semigroup
        alpha = _check_alpha(params["alpha"])
        t = float(params["t"])
        if t < 0.0:
            raise ParameterError(f"semigroup time must be nonnegative, got {t}")
        return np.exp(-t * kabs**alpha)

    def __call__(self, field: SpectralField) -> SpectralField:
        if field.grid != self.grid:
            raise ParameterError("field grid does not match operator grid")
        return SpectralField(self.grid, self.symbol * field.coef, real=field.real)


def fractional_laplacian(field: SpectralField, alpha: float) -> SpectralField:
    """Apply Lambda^alpha = (-Laplacian)^(alpha/2), alpha in (0, 2]."""
    return SymbolOp(field.grid, "fractional_laplacian", alpha=alpha)(field)


def inverse_lambda(field: SpectralField) -> SpectralField:
    """Apply Lambda^(-1); the mean mode is sent to zero."""
    return SymbolOp(field.grid, "inverse_lambda")(field)


def gradient(field: SpectralField, axis: int) -> SpectralField:
    """Partial derivative along axis (0 for x1, 1 for x2)."""
    return SymbolOp(field.grid, "gradient", axis=axis)(field)


def riesz_perp_velocity(field: SpectralField) -> tuple[SpectralField, SpectralField]:
    """Divergence-free velocity u = perp-grad Lambda^(-1) theta.

    Componentwise u_hat(k) = i * kperp / |k| * theta_hat(k) with
    kperp = (-k2, k1) and u_hat(0) = 0.  The spectral divergence of the
    result vanishes identically because k . kperp = 0 mode by mode.
    """
    u1 = SymbolOp(field.grid, "riesz_perp", axis=0)(field)
    u2 = SymbolOp(field.grid, "riesz_perp", axis=1)(field)
    return u1, u2


def semigroup_apply(field: SpectralField, alpha: float, t: float) -> SpectralField:
    """Apply the dissipative semigroup exp(-t Lambda^alpha)."""
    return SymbolOp(field.grid, "semigroup", alpha=alpha, t=t)(field)


def dealias(field: SpectralField) -> SpectralField:
    """Zero every coefficient with max(|m1|, |m2|) above the 2/3 cutoff.

    With both factors of a pointwise product supported inside the retained
    square, aliasing from the product lands entirely outside it, so
    truncating the product reproduces the exact truncated convolution.
    """
    return SpectralField(field.grid, field.coef * field.grid.dealias_keep, real=field.real)


def lp_norm(field: SpectralField, p: float) -> float:
    """L^p norm over the box via the uniform-grid quadrature.

    On a periodic uniform grid the trapezoid rule collapses to the plain
    Riemann sum (L/n)^2 * sum |f|^p.  p = math.inf returns the grid max.
    """
    if p != math.inf and not p >= 1.0:
        raise ParameterError(f"exponent p must satisfy p >= 1 (or math.inf), got {p}")
    w = np.abs(field.physical())
    if p == math.inf:
        return float(w.max())
    if p == 1.0:
        return float(w.sum() * field.grid.cell_area)
    if p == 2.0:
        return float(math.sqrt(np.square(w).sum() * field.grid.cell_area))
    return float((np.power(w, p).sum() * field.grid.cell_area) ** (1.0 / p))
