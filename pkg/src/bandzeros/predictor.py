"""Zero-distribution forecasts and their verification.

Implements the count vector V_n, per-band zero-count prediction, gap-occupancy
forecasting through the real Jacobi inversion, the measured-data congruence
check, rational-measure periodicity, and gap accumulation experiments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvariantError, WeightError
from .geometry import IntervalSystem, WeightSpec, eval_H, sqrt_H
from .surface import (
    FirstKindBasis,
    GapPoint,
    PeriodData,
    abel_gap_integral,
    lattice_reduce,
    normalize_differentials,
    period_matrix,
    solve_inversion,
)
from . import orthopoly
from . import quadrature as quad


@dataclass(frozen=True)
class WeightTransform:
    """The log-weight transform vector phi(W), one entry per gap.

    The orientation is the one under which the count vector V_n reproduces
    measured band counts; for Bernstein-Szego weights it agrees with the
    closed form built from u_inf and the root crossing integrals.
    """

    values: np.ndarray
    identity_defect: float | None = None   # Bernstein-Szego cross-check


def weight_transform(sys: IntervalSystem, basis: FirstKindBasis,
                     spec: WeightSpec, period: PeriodData | None = None):
    """Log-weight transform against the normalized basis.

    Smooth weights go through band-wise singular quadrature of log|W|.
    Bernstein-Szego weights use the closed form
        phi = (1/2) sum_j m_j (eps_j I_j + u_inf - B e_{r_j}),
    whose lattice column is picked by the crossing path of each root: the
    root's own gap for real gap roots, the first gap for complex roots and
    roots left of E, none for roots right of E.  The quadrature value is kept
    as a consistency defect (exact equality is expected when all eps_j = +1,
    since the sign factors are invisible to log|W|).
    """
    g = basis.genus
    if g == 0:
        return WeightTransform(np.zeros(0))
    quad_val = np.zeros(g)
    for k, (lo, hi) in enumerate(sys.bands):
        sign = (-1.0) ** (sys.l - (k + 1))
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        others = [a for a in sys.endpoints if a != lo and a != hi]

        def dens(x, j):
            rest = np.ones_like(x)
            for a in others:
                rest = rest * (x - a)
            return basis.q(j, x) * sign / (np.pi * np.sqrt(rest))

        for j in range(g):
            # the cos substitution absorbs 1/sqrt((x-lo)(hi-x)); log|W| is
            # integrable against it
            def f(theta, j=j):
                x = mid + half * np.cos(theta)
                w = np.abs(np.asarray(spec.eval_W(x), dtype=float))
                if np.any(w == 0.0):
                    raise WeightError("W vanishes on E")
                return dens(x, j) * np.log(w)

            quad_val[j] += _theta_integral(f)
    if not spec.is_bernstein_szego:
        return WeightTransform(quad_val)
    if period is None:
        from .surface import period_matrix

        period = period_matrix(sys, basis)
    closed = np.zeros(g, dtype=complex)
    closed_plus = np.zeros(g, dtype=complex)
    for w, m, s in spec.weight.roots:
        I = root_crossing_integral(sys, basis, w)
        shift = period.u_inf - _crossing_column(sys, period, w)
        closed += 0.5 * m * (s * I + shift)
        closed_plus += 0.5 * m * (I + shift)
    closed = np.real(closed)
    defect = float(np.max(np.abs(np.real(closed_plus) - quad_val)))
    return WeightTransform(closed, defect)


def _crossing_column(sys, period, w):
    """Lattice column crossed by the surface path through the root w."""
    g = sys.l - 1
    w = complex(w)
    a = sys.endpoints
    if w.imag == 0.0 and w.real > a[-1]:
        return np.zeros(g)
    if w.imag == 0.0 and a[0] < w.real < a[-1]:
        j = sys.gap_of(w.real)
    else:
        j = 0
    return period.B_sym[:, j]


def _theta_integral(f, order=512):
    from numpy.polynomial.legendre import leggauss

    t, w = leggauss(order)
    theta = 0.5 * np.pi * (t + 1.0)
    return float(np.sum(0.5 * np.pi * w * f(theta)))


def root_crossing_integral(sys, basis, w):
    """The vector of surface integrals from w- to w+ through the gap system.

    For real w off E this is twice the real gap (or outside-segment) integral
    from the nearest left branch point; for complex w twice the straight-line
    integral from a_1.  Only conjugate-closed combinations are real.
    """
    g = basis.genus
    w = complex(w)
    a = sys.endpoints
    if w.imag == 0.0:
        x = w.real
        if sys.in_E(x):
            raise ValueError("crossing integral undefined on E")
        j = sys.gap_of(x)
        if j is not None:
            return 2.0 * abel_gap_integral(sys, basis, GapPoint(j, x, +1)).astype(
                complex
            )
        out = np.empty(g, dtype=complex)
        if x > a[-1]:
            for k in range(g):
                out[k] = 2.0 * quad.gap_integral(
                    lambda t, k=k: basis.q(k, t) / np.sqrt(eval_H(sys, t)),
                    (a[-1], x),
                )
        else:
            sign = (-1.0) ** sys.l
            for k in range(g):
                out[k] = -2.0 * quad.gap_integral(
                    lambda t, k=k: basis.q(k, t) * sign / np.sqrt(eval_H(sys, t)),
                    (x, a[0]),
                )
        return out
    out = np.empty(g, dtype=complex)
    for k in range(g):
        out[k] = 2.0 * quad.segment_integral(
            lambda z, k=k: basis.q(k, z) / sqrt_H(sys, z),
            complex(a[0]),
            w,
            sqrt_at_start=True,
        )
    return out


@dataclass(frozen=True)
class PredictionVector:
    """V_n and the derived per-band count forecast."""

    n: int
    V: np.ndarray
    predicted_counts: tuple        # all l bands; last one by conservation
    predicted_occupancy: tuple
    interior_flag: bool
    cell_coords: np.ndarray        # fractional parts of 2*V
    predicted_exterior: int = 0

    @property
    def total(self) -> int:
        return (sum(self.predicted_counts) + sum(self.predicted_occupancy)
                + self.predicted_exterior)


def compute_V(sys, period: PeriodData, spec, n, basis=None, phi_w=None,
              epsilon=0.02, forecast=None, margin_epsilon=0.05):
    """Evaluate the count vector and the floor-rounded band forecast.

    The interior flag checks whether 2*V_n stays epsilon-away from the
    half-integer rounding boundaries in every cell coordinate, and that the
    forecast gap points keep a chart margin of margin_epsilon from the
    branch points, where the zero classification is ambiguous at finite n.
    """
    l = sys.l
    dR = spec.factorization.deg_R
    zR = np.array(spec.factorization.endpoint_zero_counts(), dtype=float)
    ext = _predicted_exterior(sys, spec)
    if l == 1:
        return PredictionVector(n, np.zeros(0), (n - ext,), (), True,
                                np.zeros(0), ext)
    if phi_w is None:
        basis = basis or normalize_differentials(sys)
        phi_w = weight_transform(sys, basis, spec, period)
    B = period.B_sym
    corr = np.linalg.solve(B, phi_w.values)
    V = (2 * n + dR - l + 1) * 0.5 * period.omega[: l - 1] - corr - 0.5 * zR[: l - 1]
    if forecast is None:
        basis = basis or normalize_differentials(sys)
        forecast = forecast_gaps(sys, basis, period, spec, n, phi_w=phi_w)
    occ = forecast.occupancy
    if forecast.lam:
        # exact joint form: V_j - lam_j/2 + 1/2 = zP_j + occ_j on the cell
        lam = np.asarray(forecast.lam)
        counts = [
            int(np.round(V[j] - 0.5 * lam[j] + 0.5)) - occ[j]
            for j in range(l - 1)
        ]
    else:
        counts = [int(np.floor(v + 0.5)) for v in V]
    last = n - sum(counts) - sum(occ) - ext
    cell = np.mod(2.0 * V, 1.0)
    interior = bool(np.all((cell >= epsilon) & (cell <= 1.0 - epsilon)))
    if forecast.margins:
        interior = interior and all(m >= margin_epsilon for m in forecast.margins)
    return PredictionVector(n, V, tuple(counts) + (last,), occ, interior, cell, ext)


def _predicted_exterior(sys, spec):
    """A simple real weight root outside [a_1, a_2l] with sign -1 attracts
    exactly one polynomial zero to its side of E."""
    if not spec.is_bernstein_szego:
        return 0
    a = sys.endpoints
    return sum(
        m for w, m, s in spec.weight.roots
        if s == -1 and w.imag == 0.0 and not (a[0] < w.real < a[-1])
    )


@dataclass(frozen=True)
class GapForecast:
    """Predicted gap data from the real Jacobi inversion."""

    n: int
    points: tuple                  # GapPoint per gap
    deltas: tuple                  # sheet signs
    occupancy: tuple               # (1 - delta)/2
    residual: float
    lam: tuple = ()                # chart-sum lift of 2 B^-1 a (no reduction)
    margins: tuple = ()            # per-gap distance from the chart boundary


def forecast_gaps(sys, basis, period, spec, n, phi_w=None, tol=1e-8):
    """Solve the inversion problem for the gap points and sheet signs at n."""
    l = sys.l
    if l == 1:
        return GapForecast(n, (), (), (), 0.0)
    if phi_w is None:
        phi_w = weight_transform(sys, basis, spec, period)
    dR = spec.factorization.deg_R
    zR = np.array(spec.factorization.endpoint_zero_counts(), dtype=float)
    B = period.B_sym
    # target = B V_n + half the sum of lattice columns, which ties the gap
    # points, sheet signs, and the count vector to one torus coordinate
    v = (
        0.5 * (2 * n + dR - l + 1) * period.u_inf
        - phi_w.values
        - 0.5 * _zR_term(sys, period, zR)
        + 0.5 * np.sum(B, axis=1)
    )
    sol = solve_inversion(sys, basis, period, v, tol=tol)
    deltas = tuple(p.sheet for p in sol.points)
    occ = tuple((1 - d) // 2 for d in deltas)
    a = np.zeros(l - 1)
    for p in sol.points:
        a += abel_gap_integral(sys, basis, p)
    # the chart-sum lift itself (no lattice reduction) is the representative
    # that closes the count identity
    lam = np.linalg.solve(B, 2.0 * a)
    # chart boundaries sit at theta = 0 mod pi (x at a gap endpoint)
    margins = tuple(
        min(p.theta(sys) % np.pi, np.pi - (p.theta(sys) % np.pi)) / np.pi
        for p in sol.points
    )
    return GapForecast(n, sol.points, deltas, occ,
                       float(np.max(np.abs(sol.residual))), tuple(lam), margins)


def _zR_term(sys, period, zR):
    """sum_j #Z(R,E_j) * (column of the beta-period matrix for band j).

    Band j < l pairs with B[:, j]; the last band's loop is homologous to zero
    in the real torus, so it contributes nothing.
    """
    g = sys.l - 1
    out = np.zeros(g)
    for j in range(g):
        out += zR[j] * period.B_sym[:, j]
    return out


@dataclass(frozen=True)
class CongruenceReport:
    """Defect of the measured-gap-data congruence, after lattice reduction."""

    n: int
    defect: float
    lhs: np.ndarray
    rhs: np.ndarray
    lattice_shift: np.ndarray


def verify_congruence(sys, basis, period, spec, n, pell, phi_w=None):
    """Check the Abel-sum congruence satisfied by the measured Pell data.

    Both sides are evaluated from independently computed ingredients: the
    left from the measured gap points and sheets, the right from the period
    data, the weight's root integrals, and the actual band counts.
    """
    l = sys.l
    if l == 1:
        return CongruenceReport(n, 0.0, np.zeros(0), np.zeros(0), np.zeros(0))
    rho = spec.weight
    nu = rho.degree
    dR = spec.factorization.deg_R
    zR = np.array(spec.factorization.endpoint_zero_counts(), dtype=float)
    zeros = orthopoly.polynomial_zeros(pell.rec_P, n)
    report = orthopoly.count_zeros(sys, zeros)
    zP = np.array(report.band_counts, dtype=float)

    lhs = np.zeros(l - 1)
    for j, (xj, dj) in enumerate(zip(pell.gap_points, pell.gap_signs)):
        p = GapPoint(j, float(xj), int(dj)).canonical(sys)
        lhs += 2.0 * abel_gap_integral(sys, basis, p)

    total_I = np.zeros(l - 1, dtype=complex)
    for w, m, s in rho.roots:
        total_I += m * s * root_crossing_integral(sys, basis, w)
    # with this package's orientation (u_inf = B omega, B negative definite)
    # the infinity term enters with a plus sign
    rhs = (
        (2 * n + dR - nu - (l - 1)) * period.u_inf
        - np.real(total_I)
        + _weighted_B_columns(sys, period, 2.0 * zP + zR)
    )
    lam, shift = lattice_reduce(lhs - rhs, period.B_sym)
    return CongruenceReport(n, float(np.max(np.abs(lam))), lhs, rhs, shift)


def _weighted_B_columns(sys, period, coeffs):
    g = sys.l - 1
    out = np.zeros(g)
    for j in range(g):
        out += coeffs[j] * period.B_sym[:, j]
    return out


@dataclass(frozen=True)
class ComparisonRow:
    n: int
    actual_counts: tuple
    predicted_counts: tuple
    defect: int
    occupancy_actual: tuple
    occupancy_predicted: tuple
    interior_flag: bool


@dataclass(frozen=True)
class ComparisonTable:
    rows: tuple

    @property
    def max_defect(self) -> int:
        return max((r.defect for r in self.rows), default=0)

    @property
    def flagged_exact(self) -> bool:
        return all(
            r.actual_counts == r.predicted_counts
            and r.occupancy_actual == r.occupancy_predicted
            for r in self.rows
            if r.interior_flag
        )

    @property
    def occupancy_match_rate(self) -> float:
        if not self.rows:
            return 1.0
        hits = sum(
            1 for r in self.rows if r.occupancy_actual == r.occupancy_predicted
        )
        return hits / len(self.rows)


def compare(spec: WeightSpec, n_range, basis=None, period=None,
            epsilon=0.02, nodes_per_band=None,
            margin_epsilon=0.05) -> ComparisonTable:
    """Join the direct zero counts with the forecasts over a range of n."""
    sys = spec.system
    n_list = list(n_range)
    n_max = max(n_list)
    basis = basis or normalize_differentials(sys)
    period = period or period_matrix(sys, basis)
    phi_w = weight_transform(sys, basis, spec, period) if sys.l > 1 else None
    meas = discretize_cached(spec, nodes_per_band or max(8 * n_max + 32, 256))
    rec = orthopoly.stieltjes_recurrence(meas, n_max + 1)
    rows = []
    for n in n_list:
        report = orthopoly.count_zeros(sys, orthopoly.polynomial_zeros(rec, n))
        fc = forecast_gaps(sys, basis, period, spec, n, phi_w=phi_w) \
            if sys.l > 1 else GapForecast(n, (), (), (), 0.0)
        pv = compute_V(sys, period, spec, n, basis=basis, phi_w=phi_w,
                       epsilon=epsilon, forecast=fc, margin_epsilon=margin_epsilon)
        defect = max(
            (abs(a - p) for a, p in zip(report.band_counts, pv.predicted_counts)),
            default=0,
        )
        rows.append(
            ComparisonRow(
                n,
                report.band_counts,
                pv.predicted_counts,
                int(defect),
                report.gap_occupancy,
                fc.occupancy,
                pv.interior_flag,
            )
        )
    return ComparisonTable(tuple(rows))


def discretize_cached(spec, nodes_per_band):
    return orthopoly.discretize(spec, nodes_per_band)


@dataclass(frozen=True)
class PeriodicityReport:
    N: int
    k_vec: tuple
    increments_exact: bool
    gap_data_invariant: bool
    details: tuple


def rational_periodicity(spec: WeightSpec, N: int, kappa: int, m_range,
                         period: PeriodData | None = None,
                         check_pell=True) -> PeriodicityReport:
    """Check count increments and gap-data invariance along residue classes.

    For harmonic measures omega = k/N, the band counts at n and n+N must
    differ by exactly k_j, and the measured gap data must repeat.
    """
    sys = spec.system
    basis = normalize_differentials(sys)
    period = period or period_matrix(sys, basis)
    k_vec = period.omega * N
    k_round = np.round(k_vec)
    if np.max(np.abs(k_vec - k_round)) > 1e-6:
        raise InvariantError("harmonic measures are not rational with period N")
    ms = list(m_range)
    n_max = kappa + (max(ms) + 1) * N
    meas = orthopoly.discretize(spec, max(8 * n_max + 32, 256))
    rec = orthopoly.stieltjes_recurrence(meas, n_max + 1)
    details = []
    inc_ok = True
    gap_ok = True
    prev_counts, prev_pell = None, None
    for m in ms + [max(ms) + 1]:
        n = kappa + m * N
        counts = orthopoly.count_zeros(
            sys, orthopoly.polynomial_zeros(rec, n)
        ).band_counts
        pell = None
        if check_pell and spec.is_bernstein_szego and sys.l > 1:
            pell = orthopoly.pell_data(spec, n)
        if prev_counts is not None:
            inc = tuple(c - p for c, p in zip(counts, prev_counts))
            ok = all(abs(i - k) < 0.5 for i, k in zip(inc, k_round))
            inc_ok = inc_ok and ok
            if pell is not None and prev_pell is not None:
                span = sys.span
                same = all(
                    abs(x1 - x0) <= 1e-6 * span and d1 == d0
                    for x1, d1, x0, d0 in zip(
                        pell.gap_points, pell.gap_signs,
                        prev_pell.gap_points, prev_pell.gap_signs,
                    )
                )
                gap_ok = gap_ok and same
            details.append((n, counts, inc, ok))
        prev_counts, prev_pell = counts, pell
    return PeriodicityReport(
        N, tuple(int(k) for k in k_round), inc_ok, gap_ok, tuple(details)
    )


@dataclass(frozen=True)
class AccumulationReport:
    n_max: int
    visited: tuple                 # per gap: array of visited x values
    largest_unvisited: tuple       # per gap: longest unvisited subinterval
    distinct_points: tuple         # per gap: cluster count
    target_distances: tuple


def accumulation_experiment(spec: WeightSpec, n_max, targets=None,
                            basis=None, period=None) -> AccumulationReport:
    """Track the forecast gap points with delta = -1 over n = 1..n_max."""
    sys = spec.system
    g = sys.l - 1
    if g == 0:
        return AccumulationReport(n_max, (), (), (), ())
    basis = basis or normalize_differentials(sys)
    period = period or period_matrix(sys, basis)
    phi_w = weight_transform(sys, basis, spec, period)
    visited = [[] for _ in range(g)]
    for n in range(1, n_max + 1):
        fc = forecast_gaps(sys, basis, period, spec, n, phi_w=phi_w)
        for j, (p, d) in enumerate(zip(fc.points, fc.deltas)):
            if d == -1:
                visited[j].append(p.x)
    unvisited, distinct = [], []
    for j, (lo, hi) in enumerate(sys.gaps):
        xs = np.sort(np.array(visited[j]))
        pts = np.concatenate([[lo], xs, [hi]])
        unvisited.append(float(np.max(np.diff(pts))) if len(pts) > 1 else hi - lo)
        if len(xs) == 0:
            distinct.append(0)
        else:
            ctol = 1e-3 * (hi - lo)
            distinct.append(int(1 + np.sum(np.diff(xs) > ctol)))
    tdist = []
    if targets:
        for j, x_t in targets:
            xs = np.array(visited[j])
            tdist.append(
                float(np.min(np.abs(xs - x_t))) if len(xs) else float("inf")
            )
    return AccumulationReport(
        n_max,
        tuple(np.array(v) for v in visited),
        tuple(unvisited),
        tuple(distinct),
        tuple(tdist),
    )
