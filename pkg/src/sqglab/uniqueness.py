"""Uniqueness experiments: contraction of the solution map on differences.

The difference w of two mild solutions with the same data solves a linear
equation forced by the symmetrized product N(w, theta), and shrinking the
horizon drives the Lipschitz constant of the Duhamel map below one.  This
module measures that contraction factor in the norms the argument runs
in: for alpha in (3/2, 2] an L^(p/2)-in-time negative-order Besov norm,
and for rougher dissipation a sup-in-time Besov norm combined with the
grid max of the Riesz velocity of the low-pass block.  Alongside the
factor it runs twin-solve agreement experiments and the linear-semigroup
continuity criterion that characterizes strong B^s_{p,infty} continuity
at t = 0 through the vanishing of the weighted block-norm tail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .littlewood import (
    BesovIndex,
    DyadicBank,
    TimeSeriesField,
    besov_norm,
    besov_time_norm,
    block_norms,
    psi_block,
)
from .mild import (
    MildSolution,
    SolveParams,
    duhamel_series,
    linear_solution_series,
    picard_solve,
    solve,
)
from .spectral import (
    ParameterError,
    SpectralField,
    lp_norm,
    riesz_perp_velocity,
    semigroup_apply,
)

_MODES = ("identical", "dt", "picard_depth", "delta")


def end_point_exponent(alpha: float) -> tuple[float, float]:
    """Critical integrability pair (p, q) = (4/(2 alpha - 3), p/(p - 2)).

    Defined for alpha in (3/2, 2] only; below that the critical space
    degenerates to p = infinity and a different norm family applies.
    The derivative-count identity -2 alpha/p + 2/p + 1 =
    -1/2 + (p - 2) alpha/p behind this choice is checked both ways on
    every call.
    """
    if not 1.5 < alpha <= 2.0:
        raise ParameterError(
            f"integrability pair needs alpha in (3/2, 2], got {alpha}"
        )
    p = 4.0 / (2.0 * alpha - 3.0)
    q = p / (p - 2.0)
    gap = exponent_identity_gap(alpha)
    if gap > 1e-12:
        raise ParameterError(f"exponent identity violated by {gap:.3e}")
    return p, q


def exponent_identity_gap(alpha: float) -> float:
    """|(-2 alpha/p + 2/p + 1) - (-1/2 + (p - 2) alpha/p)| at p = 4/(2 alpha - 3)."""
    p = 4.0 / (2.0 * alpha - 3.0)
    left = -2.0 * alpha / p + 2.0 / p + 1.0
    right = -0.5 + (p - 2.0) / p * alpha
    return abs(left - right)


# ---------------------------------------------------------------------------
# Contraction norms per dissipation strength
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ContractionNorm:
    """The norm a difference of solutions is contracted in.

    index/time_exponent define the mixed norm on the difference series
    (time integration outside the block aggregation); riesz_low adds the
    sup-in-time grid max of the Riesz velocity of the low-pass block,
    the extra scalar the rough-dissipation cases track.  data_index is
    the space the solutions themselves are assumed bounded in.
    """

    index: BesovIndex
    time_exponent: float
    riesz_low: bool
    data_index: BesovIndex

    def __post_init__(self):
        if self.time_exponent != math.inf and not self.time_exponent >= 1.0:
            raise ParameterError(
                f"time exponent must be >= 1, got {self.time_exponent}"
            )


def contraction_norm_spec(
    alpha: float, s: float | None = None, r: float | None = None
) -> ContractionNorm:
    """Dispatch the contraction norm by dissipation strength.

    alpha > 3/2: L^(p/2)(0,T; B^(-1/2)_{p,p/2}), data in B^(-1/2)_{p,p/(p-2)}.
    alpha = 3/2: sup-in-time B^(-1/2)_{inf,inf} + Riesz low-pass max,
                 data in B^(-1/2)_{inf,1}.
    1 < alpha < 3/2: same shape at regularity 1 - alpha, data exponent
                 q = inf.
    alpha = 1:   regularity -s for a configurable 0 < s < 1 (default 1/4),
                 data in B^0_{inf,inf}; the auxiliary time exponent r
                 must satisfy 1 < r < 1/s (default 2, recorded only).
    alpha < 1:   regularity -s with 0 < s < 1 - alpha (default (1-alpha)/2).
    """
    if not 0.0 < alpha <= 2.0:
        raise ParameterError(f"alpha must lie in (0, 2], got {alpha}")
    if alpha > 1.5:
        p, q = end_point_exponent(alpha)
        return ContractionNorm(
            index=BesovIndex(-0.5, p, p / 2.0),
            time_exponent=p / 2.0,
            riesz_low=False,
            data_index=BesovIndex(-0.5, p, q),
        )
    if alpha == 1.5:
        return ContractionNorm(
            index=BesovIndex(-0.5, math.inf, math.inf),
            time_exponent=math.inf,
            riesz_low=True,
            data_index=BesovIndex(-0.5, math.inf, 1.0),
        )
    if alpha > 1.0:
        return ContractionNorm(
            index=BesovIndex(1.0 - alpha, math.inf, math.inf),
            time_exponent=math.inf,
            riesz_low=True,
            data_index=BesovIndex(1.0 - alpha, math.inf, math.inf),
        )
    if alpha == 1.0:
        s = 0.25 if s is None else float(s)
        if not 0.0 < s < 1.0:
            raise ParameterError(f"alpha = 1 needs 0 < s < 1, got {s}")
        r = 2.0 if r is None else float(r)
        if not 1.0 < r < 1.0 / s:
            raise ParameterError(f"auxiliary exponent needs 1 < r < {1.0 / s}, got {r}")
        return ContractionNorm(
            index=BesovIndex(-s, math.inf, math.inf),
            time_exponent=math.inf,
            riesz_low=True,
            data_index=BesovIndex(0.0, math.inf, math.inf),
        )
    s = 0.5 * (1.0 - alpha) if s is None else float(s)
    if not 0.0 < s < 1.0 - alpha:
        raise ParameterError(f"alpha < 1 needs 0 < s < 1 - alpha, got {s}")
    return ContractionNorm(
        index=BesovIndex(-s, math.inf, math.inf),
        time_exponent=math.inf,
        riesz_low=True,
        data_index=BesovIndex(1.0 - alpha, math.inf, math.inf),
    )


def riesz_low_max(f: SpectralField, bank: DyadicBank) -> float:
    """Grid max over both components of the Riesz velocity of the low block."""
    u1, u2 = riesz_perp_velocity(psi_block(f, bank))
    return max(lp_norm(u1, math.inf), lp_norm(u2, math.inf))


def instant_norm(f: SpectralField, bank: DyadicBank, spec: ContractionNorm) -> float:
    """Single-time contraction quantity: Besov norm plus optional Riesz part."""
    value = besov_norm(f, bank, spec.index)
    if spec.riesz_low:
        value += riesz_low_max(f, bank)
    return value


def difference_norm(
    series: TimeSeriesField, bank: DyadicBank, spec: ContractionNorm
) -> float:
    """Mixed-time contraction norm of a difference series."""
    value = besov_time_norm(series, bank, spec.index, spec.time_exponent)
    if spec.riesz_low:
        value += max(riesz_low_max(f, bank) for f in series.fields)
    return value


# ---------------------------------------------------------------------------
# Contraction factor of the solution map
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ContractionResult:
    """Lipschitz ratio of the Duhamel map on a pair of trial series."""

    factor: float
    numerator: float
    denominator: float
    degenerate: bool

    def __float__(self) -> float:
        return self.factor


def _as_series(x) -> TimeSeriesField:
    if isinstance(x, MildSolution):
        return x.series
    if isinstance(x, TimeSeriesField):
        return x
    raise ParameterError("expected a time series or a solved run")


def contraction_factor(
    theta1,
    theta2,
    params: SolveParams,
    bank: DyadicBank,
    spec: ContractionNorm | None = None,
) -> ContractionResult:
    """||Duhamel[theta1] - Duhamel[theta2]||_X / ||theta1 - theta2||_X.

    The linear parts of the solution map cancel in the difference, so the
    data term never enters.  Identical inputs (denominator below 1e-14)
    return a degenerate zero rather than dividing by it.  The ratio is
    exactly symmetric in its two arguments.
    """
    spec = contraction_norm_spec(params.alpha) if spec is None else spec
    s1, s2 = _as_series(theta1), _as_series(theta2)
    w = s1 - s2
    denominator = difference_norm(w, bank, spec)
    if denominator < 1e-14:
        return ContractionResult(0.0, 0.0, denominator, True)
    image = duhamel_series(s1, params) - duhamel_series(s2, params)
    numerator = difference_norm(image, bank, spec)
    return ContractionResult(numerator / denominator, numerator, denominator, False)


def contraction_ladder(
    theta0: SpectralField,
    params: SolveParams,
    bank: DyadicBank,
    horizons,
    spec: ContractionNorm | None = None,
) -> list[ContractionResult]:
    """Contraction factor at each horizon, sliced from one solve.

    The trial pair is the marched solution against the bare linear
    evolution of the same data; their difference is the accumulated
    nonlinear correction, which exercises the map away from zero.
    """
    horizons = sorted(float(t) for t in horizons)
    if not horizons or horizons[0] <= 0.0:
        raise ParameterError("horizons must be positive")
    top = replace(params, t_final=horizons[-1])
    full = solve(theta0, top)
    linear = linear_solution_series(theta0, top)
    out = []
    for t in horizons:
        sliced = replace(params, t_final=t)
        out.append(
            contraction_factor(
                full.series.slice_until(t),
                linear.slice_until(t),
                sliced,
                bank,
                spec,
            )
        )
    return out


# ---------------------------------------------------------------------------
# Twin runs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UniquenessExperiment:
    """Two runs, their difference series, and its norm over time.

    w_norms[k] is the single-time contraction quantity of w at the k-th
    shared sample.  Runs always share the grid; outside the delta mode
    they share the initial data bit for bit and w(0) = 0 exactly.
    amplification is the delta-mode readout ||w(T)|| / delta, None
    otherwise.
    """

    params: SolveParams
    norm: ContractionNorm
    mode: str
    runs: tuple[MildSolution, MildSolution]
    w_series: TimeSeriesField
    w_norms: np.ndarray
    amplification: float | None = None

    def __post_init__(self):
        if self.mode not in _MODES:
            raise ParameterError(f"unknown twin mode {self.mode!r}")
        a, b = self.runs
        if a.series.grid != b.series.grid:
            raise ParameterError("twin runs must share one grid")
        if self.mode != "delta" and not np.array_equal(
            a.series[0].coef, b.series[0].coef
        ):
            raise ParameterError("twin runs must start from identical data")
        if self.mode != "delta" and float(np.abs(self.w_series[0].coef).max()) != 0.0:
            raise ParameterError("difference series must start at exactly zero")


def _align_to(series: TimeSeriesField, times: np.ndarray) -> TimeSeriesField:
    keep_idx, keep_fields = [], []
    pos = 0
    for t in times:
        while pos < len(series) and series.times[pos] < t - 1e-12:
            pos += 1
        if pos >= len(series) or abs(series.times[pos] - t) > 1e-9 * max(1.0, t):
            raise ParameterError("refined run does not sample the coarse times")
        keep_idx.append(pos)
        keep_fields.append(series[pos])
    return TimeSeriesField(times.copy(), keep_fields)


def twin_run(
    theta0: SpectralField,
    params: SolveParams,
    mode: str,
    bank: DyadicBank,
    spec: ContractionNorm | None = None,
    delta: float = 1e-6,
    depth_offset: int = 2,
) -> UniquenessExperiment:
    """Run a configured pair and record the difference-norm history.

    identical:    same configuration twice; determinism makes w vanish
                  bit for bit.
    dt:           second run at dt/2, compared on the coarse samples;
                  the gap is the temporal discretization error.
    picard_depth: fixed-point sweeps deepened by depth_offset.
    delta:        data perturbed by delta times a unit-norm copy of the
                  same profile; w(0) has contraction quantity exactly
                  delta and amplification is ||w(T)|| / delta.
    """
    if mode not in _MODES:
        raise ParameterError(f"unknown twin mode {mode!r}")
    spec = contraction_norm_spec(params.alpha) if spec is None else spec
    if mode == "picard_depth":
        run_a = picard_solve(theta0, params)
        run_b = picard_solve(
            theta0, replace(params, picard_depth=params.picard_depth + depth_offset)
        )
        series_b = run_b.series
    elif mode == "dt":
        run_a = solve(theta0, params)
        run_b = solve(
            theta0,
            replace(params, dt=params.dt / 2.0, save_stride=2 * params.save_stride),
        )
        series_b = _align_to(run_b.series, run_a.series.times)
    elif mode == "delta":
        run_a = solve(theta0, params)
        scale = instant_norm(theta0, bank, spec)
        if scale <= 0.0:
            raise ParameterError("delta mode needs nonzero initial data")
        perturbed = SpectralField(
            theta0.grid, theta0.coef * (1.0 + delta / scale), real=theta0.real
        )
        run_b = solve(perturbed, params)
        series_b = run_b.series
    else:
        run_a = solve(theta0, params)
        run_b = solve(theta0, params)
        series_b = run_b.series
    w = TimeSeriesField(
        run_a.series.times.copy(),
        [a - b for a, b in zip(run_a.series.fields, series_b.fields)],
    )
    w_norms = np.array([instant_norm(f, bank, spec) for f in w.fields])
    amplification = float(w_norms[-1] / delta) if mode == "delta" else None
    return UniquenessExperiment(
        params=params,
        norm=spec,
        mode=mode,
        runs=(run_a, run_b),
        w_series=w,
        w_norms=w_norms,
        amplification=amplification,
    )


def temporal_order(theta0: SpectralField, params: SolveParams, bank: DyadicBank,
                   spec: ContractionNorm | None = None) -> float:
    """log2 ratio of successive dt-refinement gaps at the final time.

    Three resolutions dt, dt/2, dt/4 give two twin gaps whose ratio
    estimates 2^order for the stepper's temporal order.
    """
    spec = contraction_norm_spec(params.alpha) if spec is None else spec
    first = twin_run(theta0, params, "dt", bank, spec)
    fine = replace(params, dt=params.dt / 2.0, save_stride=2 * params.save_stride)
    second = twin_run(theta0, fine, "dt", bank, spec)
    top, bottom = first.w_norms[-1], second.w_norms[-1]
    if bottom <= 0.0:
        raise ParameterError("refinement gap vanished; data too small to resolve")
    return float(np.log2(top / bottom))


# ---------------------------------------------------------------------------
# High/low split helpers
# ---------------------------------------------------------------------------


def high_partial(f: SpectralField, bank: DyadicBank, j: int) -> SpectralField:
    """Sum of the annulus blocks strictly above level j."""
    if not 0 <= j <= bank.j_max:
        raise ParameterError(f"level {j} outside 0..{bank.j_max}")
    sym = np.zeros_like(bank.psi_hat)
    for k in range(j + 1, bank.j_max + 1):
        sym = sym + bank.phi_hat[k - 1]
    return SpectralField(f.grid, f.coef * sym, real=f.real)


# ---------------------------------------------------------------------------
# Linear continuity criterion
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ContinuityReport:
    """Semigroup continuity at t = 0 against the block-norm tail.

    curve[k] = || exp(-t_k Lambda^alpha) theta0 - theta0 || in
    B^s_{p,infty}; tail is the sup of 2^(s j) block norms over the top
    two bank levels.  converged records whether the curve dropped by at
    least the requested factor from the largest to the smallest time.
    """

    times: tuple
    curve: np.ndarray
    tail: float
    tail_per_level: dict[int, float]
    converged: bool


def packet_profile(bank: DyadicBank, p: float, amplitudes) -> SpectralField:
    """Sum of origin-centered annulus kernels with prescribed L^p sizes.

    amplitudes is either a callable on the level or a sequence covering
    levels 1..j_max; each kernel is normalized to unit L^p first, so the
    block norms realize the requested law up to adjacent-filter overlap.
    """
    grid = bank.grid
    if callable(amplitudes):
        amps = [float(amplitudes(j)) for j in bank.levels()]
    else:
        amps = [float(a) for a in amplitudes]
        if len(amps) != bank.j_max:
            raise ParameterError(
                f"need {bank.j_max} level amplitudes, got {len(amps)}"
            )
    coef = np.zeros((grid.n, grid.n), dtype=np.complex128)
    for j, amp in zip(bank.levels(), amps):
        if amp == 0.0:
            continue
        kern = SpectralField(grid, bank.phi_hat[j - 1].astype(np.complex128), real=True)
        coef += kern.coef * (amp / lp_norm(kern, p))
    return SpectralField(grid, coef, real=True)


def continuity_criterion_test(
    amplitudes,
    bank: DyadicBank,
    s: float,
    p: float,
    alpha: float,
    times=(1e-1, 1e-2, 1e-3, 1e-4),
    drop_factor: float = 0.1,
) -> ContinuityReport:
    """Measure semigroup continuity at t = 0 next to the weighted tail.

    Strong continuity in B^s_{p,infty} is equivalent to the vanishing of
    2^(s j) || phi_j * theta0 ||_p as j grows; at desk scale the finite
    bank shows the dichotomy as a decay-rate gap on a fixed time ladder,
    with the tail reported alongside for the side-by-side comparison.
    """
    if not 0.0 < alpha <= 2.0:
        raise ParameterError(f"alpha must lie in (0, 2], got {alpha}")
    times = tuple(float(t) for t in times)
    if any(t <= 0.0 for t in times) or list(times) != sorted(times, reverse=True):
        raise ParameterError("times must be positive and decreasing")
    theta0 = packet_profile(bank, p, amplitudes)
    idx = BesovIndex(s, p, math.inf)
    curve = np.array(
        [
            besov_norm(semigroup_apply(theta0, alpha, t) - theta0, bank, idx)
            for t in times
        ]
    )
    norms = block_norms(theta0, bank, p)
    weighted = {
        j: float(2.0 ** (s * j) * norms[j]) for j in bank.levels()
    }
    top = [j for j in bank.levels() if j >= bank.j_max - 1]
    tail = max(weighted[j] for j in top)
    converged = bool(curve[-1] <= drop_factor * curve[0]) if curve[0] > 0.0 else True
    return ContinuityReport(
        times=times,
        curve=curve,
        tail=tail,
        tail_per_level=weighted,
        converged=converged,
    )


# ---------------------------------------------------------------------------
# Nonlinear smallness at shrinking horizon
# ---------------------------------------------------------------------------


def nonlinear_smallness(
    solution: MildSolution, bank: DyadicBank, idx: BesovIndex
) -> tuple[np.ndarray, np.ndarray]:
    """Running sup of || theta - exp(-t Lambda^alpha) theta0 || over [0, T].

    Returns the positive sample times and the running sup of the Besov
    distance to the bare semigroup evolution; read toward shrinking T
    the curve is monotone and vanishes for a genuinely mild solution.
    """
    series = solution.series
    theta0 = series[0]
    alpha = solution.params.alpha
    sups, running = [], 0.0
    for t, f in zip(series.times[1:], series.fields[1:]):
        gap = besov_norm(f - semigroup_apply(theta0, alpha, float(t)), bank, idx)
        running = max(running, gap)
        sups.append(running)
    return series.times[1:].copy(), np.array(sups)
