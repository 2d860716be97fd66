"""Mild-solution machinery for the dissipative SQG equation.

The equation marched here is

    d theta/dt = -Lambda^alpha theta - div(u theta),   u = perp-grad Lambda^(-1) theta,

whose mild (Duhamel) form is

    theta(t) = e^{-t Lambda^alpha} theta0 - int_0^t e^{-(t-s) Lambda^alpha} div(u theta)(s) ds.

The integrator mirrors that formula term for term: the linear semigroup is
applied exactly through its symbol, and the Duhamel integral over one step
is approximated by the second-order exponential rule obtained from linear
interpolation of the nonlinear integrand (ETD2).  The divergence is applied
spectrally after the product, so each step is the weak form tested against
gradients and the mean mode is conserved to rounding.

The same exponential quadrature drives the global Picard iteration: iterate
m+1 solves the linear-plus-Duhamel recurrence with the nonlinearity frozen
at iterate m, which is the fixed-point map whose contraction the uniqueness
harness measures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .littlewood import DyadicBank, TimeSeriesField, block, psi_block
from .spectral import (
    Grid2,
    ParameterError,
    SpectralField,
    inverse_lambda,
    riesz_perp_velocity,
    shared_grid,
)

BLOWUP_THRESHOLD = 1e12


class BlowUpError(RuntimeError):
    """The marched field left the trusted numerical range."""

    def __init__(self, step: int, time: float, magnitude: float):
        self.step = step
        self.time = time
        self.magnitude = magnitude
        super().__init__(
            f"field magnitude {magnitude:.3e} exceeded {BLOWUP_THRESHOLD:.0e} "
            f"at step {step} (t = {time:.6g})"
        )


class NonContractionError(RuntimeError):
    """Picard iterate distances grew for three consecutive iterates."""

    def __init__(self, distances):
        self.distances = list(distances)
        super().__init__(
            "Picard iteration diverging; successive iterate distances "
            + ", ".join(f"{d:.3e}" for d in self.distances)
        )


@dataclass(frozen=True)
class SolveParams:
    """Parameters of one mild-solution march.

    The exponential integrator is unconditionally stable for the linear
    part; the step-size bound dt * k_max^alpha <= 40 only caps the
    quadrature error of the nonlinear integral on the stiffest retained
    mode.
    """

    alpha: float
    n: int
    t_final: float
    dt: float
    box_length: float = 2.0 * math.pi
    picard_depth: int = 4
    dealias: bool = True
    nonlinear: bool = True
    save_stride: int = 1

    def __post_init__(self):
        if not 0.0 < self.alpha <= 2.0:
            raise ParameterError(f"alpha must lie in (0, 2], got {self.alpha}")
        if not self.dt > 0.0:
            raise ParameterError(f"dt must be positive, got {self.dt}")
        if not self.t_final >= self.dt:
            raise ParameterError(
                f"horizon t_final={self.t_final} must be at least one step dt={self.dt}"
            )
        if self.picard_depth < 1:
            raise ParameterError(f"picard_depth must be >= 1, got {self.picard_depth}")
        if self.save_stride < 1:
            raise ParameterError(f"save_stride must be >= 1, got {self.save_stride}")
        steps = self.t_final / self.dt
        if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
            raise ParameterError(
                f"t_final={self.t_final} is not an integer multiple of dt={self.dt}"
            )
        grid = self.grid()
        k_max = float(grid.kabs[grid.dealias_keep].max()) if self.dealias else float(
            grid.kabs.max()
        )
        if self.dt * k_max**self.alpha > 40.0:
            raise ParameterError(
                f"dt * k_max^alpha = {self.dt * k_max ** self.alpha:.3g} exceeds 40; "
                "reduce dt or the resolution"
            )

    def grid(self) -> Grid2:
        return shared_grid(self.n, self.box_length)

    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))


def _phi1(z: np.ndarray) -> np.ndarray:
    """(e^z - 1)/z, series-evaluated near 0 to avoid cancellation."""
    out = np.empty_like(z)
    small = np.abs(z) < 1e-2
    zs = z[small]
    out[small] = 1.0 + zs / 2.0 + zs**2 / 6.0 + zs**3 / 24.0 + zs**4 / 120.0 + zs**5 / 720.0
    zl = z[~small]
    out[~small] = np.expm1(zl) / zl
    return out


def _phi2(z: np.ndarray) -> np.ndarray:
    """(e^z - 1 - z)/z^2, series-evaluated near 0."""
    out = np.empty_like(z)
    small = np.abs(z) < 1e-2
    zs = z[small]
    out[small] = (
        0.5 + zs / 6.0 + zs**2 / 24.0 + zs**3 / 120.0 + zs**4 / 720.0 + zs**5 / 5040.0
    )
    zl = z[~small]
    out[~small] = (np.expm1(zl) - zl) / zl**2
    return out


class _EtdTableau:
    """Cached exponential-integrator weights for one (grid, alpha, dt)."""

    def __init__(self, grid: Grid2, alpha: float, dt: float):
        z = -dt * grid.kabs**alpha
        self.semigroup = np.exp(z)
        self.phi1_dt = dt * _phi1(z)
        self.phi2_dt = dt * _phi2(z)


_TABLEAUX: dict[tuple, _EtdTableau] = {}


def _tableau(grid: Grid2, alpha: float, dt: float) -> _EtdTableau:
    key = (grid.n, grid.box_length, alpha, dt)
    if key not in _TABLEAUX:
        if len(_TABLEAUX) > 16:
            _TABLEAUX.clear()
        _TABLEAUX[key] = _EtdTableau(grid, alpha, dt)
    return _TABLEAUX[key]


_RIESZ_SYMBOLS: dict[tuple, tuple[np.ndarray, np.ndarray]] = {}


def _riesz_symbols(grid: Grid2) -> tuple[np.ndarray, np.ndarray]:
    key = (grid.n, grid.box_length)
    if key not in _RIESZ_SYMBOLS:
        if len(_RIESZ_SYMBOLS) > 16:
            _RIESZ_SYMBOLS.clear()
        kabs = grid.kabs
        safe = np.where(kabs > 0.0, kabs, 1.0)
        _RIESZ_SYMBOLS[key] = (
            np.where(kabs > 0.0, 1j * (-grid.k2) / safe, 0.0),
            np.where(kabs > 0.0, 1j * grid.k1 / safe, 0.0),
        )
    return _RIESZ_SYMBOLS[key]


def _advection_coef(
    grid: Grid2, coef: np.ndarray, apply_dealias: bool, step: int, t: float
) -> np.ndarray:
    """Coefficients of -div(u theta) for theta given by coef, with blow-up check."""
    s1, s2 = _riesz_symbols(grid)
    u1_hat = s1 * coef
    u2_hat = s2 * coef
    theta_p = np.fft.ifft2(coef).real
    peak = float(np.abs(theta_p).max()) if theta_p.size else 0.0
    if not np.isfinite(peak) or peak > BLOWUP_THRESHOLD:
        raise BlowUpError(step, t, peak)
    p1 = np.fft.fft2(np.fft.ifft2(u1_hat).real * theta_p)
    p2 = np.fft.fft2(np.fft.ifft2(u2_hat).real * theta_p)
    if apply_dealias:
        p1 = p1 * grid.dealias_keep
        p2 = p2 * grid.dealias_keep
    return -(1j * grid.k1 * p1 + 1j * grid.k2 * p2)


def _etd2_step(
    grid: Grid2,
    tab: _EtdTableau,
    coef: np.ndarray,
    params: SolveParams,
    step: int,
    t: float,
) -> np.ndarray:
    if not params.nonlinear:
        return tab.semigroup * coef
    g0 = _advection_coef(grid, coef, params.dealias, step, t)
    predictor = tab.semigroup * coef + tab.phi1_dt * g0
    g1 = _advection_coef(grid, predictor, params.dealias, step, t + params.dt)
    return tab.semigroup * coef + (tab.phi1_dt - tab.phi2_dt) * g0 + tab.phi2_dt * g1


def duhamel_step(theta: SpectralField, params: SolveParams, t: float = 0.0) -> SpectralField:
    """Advance theta by one dt of the mild formulation."""
    grid = theta.grid
    _check_params_grid(grid, params)
    tab = _tableau(grid, params.alpha, params.dt)
    step = int(round(t / params.dt))
    coef = _etd2_step(grid, tab, theta.coef, params, step, t)
    return SpectralField(grid, coef, real=theta.real)


def _check_params_grid(grid: Grid2, params: SolveParams) -> None:
    if grid.n != params.n or grid.box_length != params.box_length:
        raise ParameterError(
            f"field grid (n={grid.n}, L={grid.box_length:g}) does not match "
            f"params (n={params.n}, L={params.box_length:g})"
        )


def _check_band_limited(theta: SpectralField, params: SolveParams) -> None:
    if not params.dealias:
        return
    outside = np.abs(theta.coef[~theta.grid.dealias_keep])
    if outside.size == 0:
        return
    scale = float(np.abs(theta.coef).max())
    if scale > 0.0 and float(outside.max()) > 1e-13 * scale:
        raise ParameterError(
            "initial datum carries energy above the dealias cutoff; "
            "restrict it to the retained band first"
        )


def _l2_of_coef(grid: Grid2, coef: np.ndarray) -> float:
    # Plancherel for the fft2 layout: ||f||_2 = (L/n^2) * sqrt(sum |c|^2)
    return float(grid.box_length / grid.n**2 * math.sqrt(np.square(np.abs(coef)).sum()))


class MildSolution:
    """A marched mild solution plus per-sample diagnostics.

    diagnostics maps "times", "l2", "linf", "mean" to aligned arrays over
    the saved samples.  Instances are not mutated after construction.
    """

    def __init__(self, params: SolveParams, series: TimeSeriesField, diagnostics: dict,
                 picard_distances: list | None = None):
        self.params = params
        self.series = series
        self.diagnostics = diagnostics
        self.picard_distances = picard_distances

    def final(self) -> SpectralField:
        return self.series[len(self.series) - 1]


def _diagnose(series: TimeSeriesField) -> dict:
    l2, linf, mean = [], [], []
    for f in series.fields:
        w = np.abs(f.physical())
        l2.append(math.sqrt(np.square(w).sum() * f.grid.cell_area))
        linf.append(float(w.max()))
        mean.append(f.mean())
    return {
        "times": series.times.copy(),
        "l2": np.array(l2),
        "linf": np.array(linf),
        "mean": np.array(mean),
    }


def solve(theta0: SpectralField, params: SolveParams) -> MildSolution:
    """March the mild formulation over [0, t_final] by repeated duhamel_step."""
    grid = theta0.grid
    _check_params_grid(grid, params)
    _check_band_limited(theta0, params)
    tab = _tableau(grid, params.alpha, params.dt)
    n_steps = params.n_steps()

    times = [0.0]
    saved = [theta0.copy()]
    coef = theta0.coef.copy()
    for step in range(n_steps):
        t = step * params.dt
        coef = _etd2_step(grid, tab, coef, params, step, t)
        if not np.all(np.isfinite(coef)):
            raise BlowUpError(step + 1, t + params.dt, math.inf)
        if (step + 1) % params.save_stride == 0 or step + 1 == n_steps:
            times.append((step + 1) * params.dt)
            saved.append(SpectralField(grid, coef.copy(), real=theta0.real))
    series = TimeSeriesField(np.array(times), saved)
    return MildSolution(params, series, _diagnose(series))


def linear_solution_series(theta0: SpectralField, params: SolveParams) -> TimeSeriesField:
    """e^{-t Lambda^alpha} theta0 sampled on the step grid, exact per symbol."""
    grid = theta0.grid
    _check_params_grid(grid, params)
    tab = _tableau(grid, params.alpha, params.dt)
    n_steps = params.n_steps()
    fields = [theta0.copy()]
    coef = theta0.coef.copy()
    for _ in range(n_steps):
        coef = tab.semigroup * coef
        fields.append(SpectralField(grid, coef.copy(), real=theta0.real))
    times = params.dt * np.arange(n_steps + 1)
    return TimeSeriesField(times, fields)


def duhamel_series(source: TimeSeriesField, params: SolveParams) -> TimeSeriesField:
    """The Duhamel integral of -div(u theta) evaluated along a given series.

    Returns D with D(0) = 0 and

        D(t_{k+1}) = e^{-dt Lambda^alpha} D(t_k)
                     + dt [ (phi1 - phi2) G(t_k) + phi2 G(t_{k+1}) ],

    the same exponential-trapezoid quadrature the stepper uses, with the
    nonlinear integrand G frozen on the supplied series.
    """
    grid = source.grid
    _check_params_grid(grid, params)
    if len(source) != params.n_steps() + 1:
        raise ParameterError("source series does not cover every step of the horizon")
    tab = _tableau(grid, params.alpha, params.dt)
    w1 = tab.phi1_dt - tab.phi2_dt
    fields = [SpectralField(grid, np.zeros_like(source[0].coef), real=True)]
    acc = fields[0].coef.copy()
    g_prev = _advection_coef(grid, source[0].coef, params.dealias, 0, 0.0)
    for k in range(params.n_steps()):
        t_next = (k + 1) * params.dt
        g_next = _advection_coef(grid, source[k + 1].coef, params.dealias, k + 1, t_next)
        acc = tab.semigroup * acc + w1 * g_prev + tab.phi2_dt * g_next
        fields.append(SpectralField(grid, acc.copy(), real=True))
        g_prev = g_next
    return TimeSeriesField(source.times.copy(), fields)


def picard_solve(theta0: SpectralField, params: SolveParams) -> MildSolution:
    """Global Picard iteration of the Duhamel fixed point over [0, t_final].

    Starts from the linear solution and applies picard_depth sweeps of

        theta^{(m+1)} = e^{-t Lambda^alpha} theta0 + Duhamel[theta^{(m)}],

    recording the sup-in-time L^2 distance between consecutive iterates.
    Raises a non-contraction error when that distance grows three times in
    a row.
    """
    grid = theta0.grid
    _check_params_grid(grid, params)
    _check_band_limited(theta0, params)
    _require_mean_free(theta0, "theta0")

    linear = linear_solution_series(theta0, params)
    current = linear
    distances: list[float] = []
    growth_run = 0
    for _ in range(params.picard_depth):
        correction = duhamel_series(current, params)
        nxt = TimeSeriesField(
            linear.times.copy(),
            [a + b for a, b in zip(linear.fields, correction.fields)],
        )
        d = max(
            _l2_of_coef(grid, a.coef - b.coef)
            for a, b in zip(nxt.fields, current.fields)
        )
        if distances and d > distances[-1] * (1.0 + 1e-12):
            growth_run += 1
        else:
            growth_run = 0
        distances.append(d)
        current = nxt
        if growth_run >= 3:
            raise NonContractionError(distances)
    return MildSolution(params, current, _diagnose(current), picard_distances=distances)


# ---------------------------------------------------------------------------
# Nonlinear forms and commutators
# ---------------------------------------------------------------------------


def _require_mean_free(f: SpectralField, name: str) -> None:
    scale = float(np.abs(f.coef).max())
    if scale > 0.0 and abs(f.coef[0, 0]) > 1e-10 * scale:
        raise ParameterError(f"{name} must be mean-free")


def _masked_product(grid: Grid2, a_phys: np.ndarray, b_phys: np.ndarray,
                    apply_dealias: bool = True) -> np.ndarray:
    p = np.fft.fft2(a_phys * b_phys)
    return p * grid.dealias_keep if apply_dealias else p


def nonlinear_n(w: SpectralField, theta: SpectralField) -> tuple[SpectralField, SpectralField]:
    """Symmetrized nonlinearity N(w, theta) = u_w theta + u_theta w (a vector).

    u_h denotes perp-grad Lambda^(-1) h.  Products are formed pointwise
    from dealiased factors and the result is dealiased again, so it is the
    exact truncated convolution.
    """
    if w.grid != theta.grid:
        raise ParameterError("fields live on different grids")
    _require_mean_free(w, "w")
    _require_mean_free(theta, "theta")
    grid = w.grid
    uw1, uw2 = riesz_perp_velocity(w)
    ut1, ut2 = riesz_perp_velocity(theta)
    wp = w.physical()
    tp = theta.physical()
    n1 = _masked_product(grid, uw1.physical(), tp) + _masked_product(grid, ut1.physical(), wp)
    n2 = _masked_product(grid, uw2.physical(), tp) + _masked_product(grid, ut2.physical(), wp)
    return (
        SpectralField(grid, n1, real=True),
        SpectralField(grid, n2, real=True),
    )


def _level_block(f: SpectralField, bank: DyadicBank, j: int) -> SpectralField:
    return psi_block(f, bank) if j == 0 else block(f, bank, j)


def divergence_form_check(
    f: SpectralField, g: SpectralField, bank: DyadicBank, k: int, l: int
) -> float:
    """Relative discrepancy of the divergence-form identity on blocks (k, l).

    Both sides of

        u_{f_k} . grad g_l + u_{g_l} . grad f_k
            = div( u_{f_k} g_l - (Lambda^{-1} g_l) (perp-grad f_k) )

    are computed through independent spectral pipelines (products in a
    different association order) and compared in L^2.  Level 0 denotes the
    low-pass block.  The identity is the diagonal-paraproduct cancellation,
    so only |k - l| <= 1 is accepted.

    The discrepancy is normalized by the largest constituent term, not by
    the left-hand side alone: on frequency shells where |xi| = 1 the whole
    identity collapses to 0 = 0 and dividing roundoff by roundoff would
    report a spurious O(1) failure.
    """
    if abs(k - l) > 1:
        raise ParameterError(f"divergence-form identity applies to |k-l| <= 1, got ({k}, {l})")
    grid = f.grid
    if g.grid != grid:
        raise ParameterError("fields live on different grids")
    fk = _level_block(f, bank, k)
    gl = _level_block(g, bank, l)

    ufk1, ufk2 = riesz_perp_velocity(fk)
    ugl1, ugl2 = riesz_perp_velocity(gl)
    dg1 = 1j * grid.k1 * gl.coef
    dg2 = 1j * grid.k2 * gl.coef
    df1 = 1j * grid.k1 * fk.coef
    df2 = 1j * grid.k2 * fk.coef

    term_a = _masked_product(grid, ufk1.physical(), np.fft.ifft2(dg1).real) + _masked_product(
        grid, ufk2.physical(), np.fft.ifft2(dg2).real
    )
    term_b = _masked_product(grid, ugl1.physical(), np.fft.ifft2(df1).real) + _masked_product(
        grid, ugl2.physical(), np.fft.ifft2(df2).real
    )
    lhs = term_a + term_b

    gl_p = gl.physical()
    lam_inv_g = inverse_lambda(gl).physical()
    perp1 = np.fft.ifft2(-df2).real  # first component of perp-grad f_k
    perp2 = np.fft.ifft2(df1).real
    v1 = _masked_product(grid, ufk1.physical(), gl_p) - _masked_product(grid, lam_inv_g, perp1)
    v2 = _masked_product(grid, ufk2.physical(), gl_p) - _masked_product(grid, lam_inv_g, perp2)
    rhs = 1j * grid.k1 * v1 + 1j * grid.k2 * v2

    num = _l2_of_coef(grid, lhs - rhs)
    den = max(
        _l2_of_coef(grid, term_a),
        _l2_of_coef(grid, term_b),
        _l2_of_coef(grid, lhs),
        _l2_of_coef(grid, rhs),
    )
    if den == 0.0:
        return 0.0
    return num / den


def commutator_a_j(
    f: SpectralField, g: SpectralField, bank: DyadicBank, j: int, route: str = "bracketed"
) -> SpectralField:
    """The level-j commutator combination A_j(f, g).

    A_j(f, g) = div(phi_j * (u_f g)) - u_f . grad(phi_j * g)
                + div(phi_j * (u_g f)),

    with u_h = perp-grad Lambda^(-1) h; the first two terms are the
    convolution commutator [del phi_j *, u_f] g and the third symmetrizes.
    route="expanded" rewrites both divergences through div u = 0 as
    phi_j * (u . grad), an independent association of the same products.
    """
    if f.grid != g.grid:
        raise ParameterError("fields live on different grids")
    if route not in ("bracketed", "expanded"):
        raise ParameterError(f"unknown route {route!r}")
    if not 1 <= j <= bank.j_max:
        raise ParameterError(f"level {j} outside 1..{bank.j_max}")
    grid = f.grid
    sym = bank.phi_hat[j - 1]
    uf1, uf2 = riesz_perp_velocity(f)
    ug1, ug2 = riesz_perp_velocity(g)
    fp = f.physical()
    gp = g.physical()

    gj = SpectralField(grid, sym * g.coef, real=g.real)
    grad_gj1 = np.fft.ifft2(1j * grid.k1 * gj.coef).real
    grad_gj2 = np.fft.ifft2(1j * grid.k2 * gj.coef).real
    t2 = _masked_product(grid, uf1.physical(), grad_gj1) + _masked_product(
        grid, uf2.physical(), grad_gj2
    )

    if route == "bracketed":
        p1 = _masked_product(grid, uf1.physical(), gp)
        p2 = _masked_product(grid, uf2.physical(), gp)
        t1 = sym * (1j * grid.k1 * p1 + 1j * grid.k2 * p2)
        q1 = _masked_product(grid, ug1.physical(), fp)
        q2 = _masked_product(grid, ug2.physical(), fp)
        t3 = sym * (1j * grid.k1 * q1 + 1j * grid.k2 * q2)
    else:
        grad_g1 = np.fft.ifft2(1j * grid.k1 * g.coef).real
        grad_g2 = np.fft.ifft2(1j * grid.k2 * g.coef).real
        t1 = sym * (
            _masked_product(grid, uf1.physical(), grad_g1)
            + _masked_product(grid, uf2.physical(), grad_g2)
        )
        grad_f1 = np.fft.ifft2(1j * grid.k1 * f.coef).real
        grad_f2 = np.fft.ifft2(1j * grid.k2 * f.coef).real
        t3 = sym * (
            _masked_product(grid, ug1.physical(), grad_f1)
            + _masked_product(grid, ug2.physical(), grad_f2)
        )

    return SpectralField(grid, t1 - t2 + t3, real=True)
