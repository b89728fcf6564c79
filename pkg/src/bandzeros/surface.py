"""Period matrix, Abel integrals over gap loops, and real Jacobi inversion.

The holomorphic differentials are q_k(z)/sqrt(H) dz with deg q_k <= l-2,
alpha-normalized over the first l-1 bands.  All torus arithmetic is carried
out in the real Jacobi variety R^(l-1)/(B-lattice): the beta-periods are taken
as their gap-only real representatives, the band halves being alpha half
periods that vanish there.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev as C
from numpy.polynomial import polynomial as P
from numpy.polynomial.legendre import leggauss

from .errors import InvariantError, NonConvergenceError
from .geometry import IntervalSystem, eval_H
from .greens import harmonic_measures
from . import quadrature as quad

_CHART_NODES = 160
_CHART_DEG = 120


@dataclass(frozen=True)
class FirstKindBasis:
    """Coefficients d[k][s] of the alpha-normalized first-kind differentials."""

    system: IntervalSystem
    d: np.ndarray                 # shape (l-1, l-1), row k = coeffs of q_k
    condition_number: float
    _charts: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def genus(self) -> int:
        return self.d.shape[0]

    def q(self, k, x):
        """Numerator polynomial q_k at x (k 0-based)."""
        return P.polyval(np.asarray(x), self.d[k])

    def q_all(self, x):
        """All numerators at scalar/array x; shape (genus, ...)."""
        x = np.asarray(x)
        return np.stack([P.polyval(x, self.d[k]) for k in range(self.genus)])


def _gap_sign(sys, gap_index_1based):
    return (-1.0) ** (sys.l - gap_index_1based)


def normalize_differentials(sys: IntervalSystem) -> FirstKindBasis:
    """Solve the alpha-period conditions for real coefficient rows."""
    l = sys.l
    g = l - 1
    if g == 0:
        return FirstKindBasis(sys, np.zeros((0, 0)), 1.0)
    # purely imaginary monomial alpha periods: A[j][s] = -2i(-1)^(l-j-1) * I
    A_im = np.empty((g, g))
    for j in range(g):
        lo, hi = sys.bands[j]
        sign = (-1.0) ** (sys.l - (j + 1))
        for s in range(g):
            A_im[j, s] = -2.0 * sign * quad.band_integral(
                lambda x, s=s: x**s / np.sqrt(-eval_H(sys, x)), (lo, hi)
            )
    cond = float(np.linalg.cond(A_im))
    if cond > 1e12:
        raise InvariantError(f"alpha-period matrix ill-conditioned: cond={cond:.3g}")
    # sum_s d[k,s] * (i*A_im[j,s]) = 2 pi i delta_jk  =>  A_im @ d[k] = 2 pi e_k
    D = np.linalg.solve(A_im, 2.0 * np.pi * np.eye(g)).T
    return FirstKindBasis(sys, D, cond)


@dataclass(frozen=True)
class PeriodData:
    """Real beta-period representatives B, the infinity integral, and omega."""

    system: IntervalSystem
    B: np.ndarray                 # (l-1, l-1), B[j][k] = beta_j period of phi_k
    u_inf: np.ndarray             # length l-1
    omega: np.ndarray             # length l, harmonic measures
    gap_loops: np.ndarray         # (l-1, l-1): full-loop increment per gap

    @property
    def B_sym(self):
        return 0.5 * (self.B + self.B.T)

    def to_report(self):
        return {
            "B": [[f"{v:.17g}" for v in row] for row in self.B],
            "u_inf": [f"{v:.17g}" for v in self.u_inf],
            "omega": [f"{v:.17g}" for v in self.omega],
        }


def period_matrix(sys: IntervalSystem, basis: FirstKindBasis) -> PeriodData:
    """Gap representatives of the beta periods, u_inf, harmonic measures."""
    g = basis.genus
    omega = harmonic_measures(sys)
    if g == 0:
        z = np.zeros((0, 0))
        return PeriodData(sys, z, np.zeros(0), omega, z)
    loops = np.empty((g, g))
    for m, gap in enumerate(sys.gaps):
        sign = _gap_sign(sys, m + 1)
        for k in range(g):
            loops[m, k] = 2.0 * sign * quad.gap_integral(
                lambda x, k=k: basis.q(k, x) / np.sqrt(eval_H(sys, x)), gap
            )
    B = np.array([loops[j:].sum(axis=0) for j in range(g)])
    a_last = sys.endpoints[-1]
    u = np.empty(g)
    for k in range(g):
        u[k] = -2.0 * quad.tail_integral(
            lambda x, k=k: basis.q(k, x) / np.sqrt(eval_H(sys, x)),
            a_last,
            scale=max(1.0, sys.span),
        )
    return PeriodData(sys, B, u, omega, loops)


@dataclass(frozen=True)
class GapPoint:
    """A point of the loop over gap j (0-based): coordinate x and sheet."""

    gap: int
    x: float
    sheet: int

    def canonical(self, sys: IntervalSystem) -> "GapPoint":
        lo, hi = sys.gaps[self.gap]
        if self.x <= lo or self.x >= hi:
            return GapPoint(self.gap, float(np.clip(self.x, lo, hi)), +1)
        return self

    def theta(self, sys: IntervalSystem) -> float:
        lo, hi = sys.gaps[self.gap]
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        t = float(np.arccos(np.clip((self.x - mid) / half, -1.0, 1.0)))
        return t if self.sheet >= 0 else 2.0 * np.pi - t


def gap_point_from_theta(sys, j, theta):
    lo, hi = sys.gaps[j]
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    theta = float(theta) % (2.0 * np.pi)
    x = float(mid + half * np.cos(theta))
    sheet = +1 if np.sin(theta) >= 0.0 else -1
    return GapPoint(j, x, sheet).canonical(sys)


def abel_gap_integral(sys, basis, p: GapPoint):
    """Half the surface integral from p* to p: sheet * int_{a_2j}^{x} of each phi."""
    g = basis.genus
    lo, hi = sys.gaps[p.gap]
    sign = _gap_sign(sys, p.gap + 1)
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    theta_end = float(np.arccos(np.clip((p.x - mid) / half, -1.0, 1.0)))
    others = [a for a in sys.endpoints if a != lo and a != hi]

    def dens(theta):
        # half*sin(theta) Jacobian cancels the gap-endpoint square roots
        x = mid + half * np.cos(theta)
        rest = np.ones_like(x)
        for a in others:
            rest *= x - a
        return basis.q_all(x) * (sign / np.sqrt(-rest))

    def run(order):
        t, w = quad._gl(order)
        theta = theta_end + (np.pi - theta_end) * 0.5 * (t + 1.0)
        wt = (np.pi - theta_end) * 0.5 * w
        return dens(theta) @ wt

    order, prev = quad.DEFAULT_ORDER, run(quad.DEFAULT_ORDER)
    while order < quad.MAX_ORDER:
        order *= 2
        cur = run(order)
        if np.max(np.abs(cur - prev)) <= quad.DEFAULT_TOL * max(
            1.0, float(np.max(np.abs(cur)))
        ):
            prev = cur
            break
        prev = cur
    return p.sheet * np.asarray(prev, dtype=float)


def _charts(sys, basis):
    """Chebyshev interpolants of theta -> abel integral, one per gap."""
    key = "charts"
    if key in basis._charts:
        return basis._charts[key]
    g = basis.genus
    tgl, wgl = leggauss(192)
    charts = []
    for j, (lo, hi) in enumerate(sys.gaps):
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        sign = _gap_sign(sys, j + 1)
        # nodes theta_i in [0, pi]; A_k(theta) = int_theta^pi dens_k(phi) dphi
        theta_nodes = 0.5 * np.pi * (np.cos(np.pi * (np.arange(_CHART_NODES) + 0.5)
                                            / _CHART_NODES) + 1.0)
        # the half*sin(phi) Jacobian cancels the two gap-endpoint square roots
        # exactly: integrand reduces to q(x)/sqrt(-rest(x)) with rest the
        # product of (x - a) over the remaining branch points
        others = [a for a in sys.endpoints if a != lo and a != hi]
        vals = np.empty((_CHART_NODES, g))
        for i, th in enumerate(theta_nodes):
            phi = th + (np.pi - th) * 0.5 * (tgl + 1.0)
            w = (np.pi - th) * 0.5 * wgl
            x = mid + half * np.cos(phi)
            rest = np.ones_like(x)
            for a in others:
                rest = rest * (x - a)
            dens = basis.q_all(x) * (sign / np.sqrt(-rest))
            vals[i] = dens @ w
        # map theta in [0,pi] to cheb domain
        coeffs = [
            C.chebfit(2.0 * theta_nodes / np.pi - 1.0, vals[:, k], _CHART_DEG)
            for k in range(g)
        ]
        charts.append(np.array(coeffs))
    basis._charts[key] = charts
    return charts


def _abel_theta(sys, basis, theta_vec):
    """Abel sum over the gaps at loop angles theta (vector of length genus)."""
    charts = _charts(sys, basis)
    g = basis.genus
    out = np.zeros(g)
    for j, th in enumerate(theta_vec):
        th = float(th) % (2.0 * np.pi)
        if th <= np.pi:
            s, tt = 1.0, th
        else:
            s, tt = -1.0, 2.0 * np.pi - th
        u = 2.0 * tt / np.pi - 1.0
        out += s * np.array([C.chebval(u, charts[j][k]) for k in range(g)])
    return out


def _abel_theta_jac(sys, basis, theta_vec):
    charts = _charts(sys, basis)
    g = basis.genus
    J = np.zeros((g, g))
    for j, th in enumerate(theta_vec):
        th = float(th) % (2.0 * np.pi)
        # d/dth of A(th) for th<=pi and of -A(2pi-th) for th>pi both equal
        # A'(tt) evaluated at the reflected angle
        tt = th if th <= np.pi else 2.0 * np.pi - th
        u = 2.0 * tt / np.pi - 1.0
        for k in range(g):
            J[k, j] = C.chebval(u, C.chebder(charts[j][k])) * (2.0 / np.pi)
    return J


def lattice_reduce(v, B):
    """Write v = B(lam + m) with lam in [-1/2, 1/2)^(l-1) componentwise."""
    B = np.asarray(B, dtype=float)
    v = np.asarray(v, dtype=float)
    if B.size == 0:
        return np.zeros(0), np.zeros(0, dtype=int)
    L = B.T        # lattice generators are the rows of B
    try:
        c = np.linalg.solve(L, v)
    except np.linalg.LinAlgError as exc:
        raise InvariantError("singular period matrix") from exc
    m = np.floor(c + 0.5).astype(int)
    lam = c - m
    return lam, m


@dataclass(frozen=True)
class InversionSolution:
    points: tuple                 # GapPoint per gap
    residual: np.ndarray          # lattice cell coordinates of the defect
    lattice_shift: np.ndarray
    iterations: int


def solve_inversion(sys, basis, period: PeriodData, v, tol=1e-8,
                    grid=32, max_iter=50) -> InversionSolution:
    """Find one loop point per gap whose Abel sum hits v modulo the B-lattice.

    Coarse grid search over the loop angles followed by damped Newton with a
    lattice-aware residual.
    """
    g = basis.genus
    v = np.asarray(v, dtype=float)
    if g == 0:
        return InversionSolution((), np.zeros(0), np.zeros(0, dtype=int), 0)
    B = period.B_sym
    charts = _charts(sys, basis)

    # coarse search: per-gap chart values on a theta grid, combined by meshgrid
    thetas = 2.0 * np.pi * np.arange(grid) / grid
    per_gap = []
    for j in range(g):
        vals = np.array([_single_gap_abel(charts, j, th, g) for th in thetas])
        per_gap.append(vals)      # (grid, g)
    best_lam, best_idx = None, None
    mesh = np.meshgrid(*[np.arange(grid)] * g, indexing="ij")
    total = np.zeros(tuple([grid] * g) + (g,))
    for j in range(g):
        total += per_gap[j][mesh[j]]
    flat = total.reshape(-1, g) - v
    lam_all = np.linalg.solve(B.T, flat.T).T
    lam_all -= np.round(lam_all)
    norms = np.max(np.abs(lam_all), axis=1)
    pick = int(np.argmin(norms))
    idx = np.unravel_index(pick, tuple([grid] * g))
    theta = np.array([thetas[idx[j]] for j in range(g)])

    def residual(th):
        r = _abel_theta(sys, basis, th) - v
        lam, m = lattice_reduce(r, B)
        return B.T @ lam, lam, m

    r, lam, m = residual(theta)
    it = 0
    while np.max(np.abs(lam)) > tol and it < max_iter:
        J = _abel_theta_jac(sys, basis, theta)
        try:
            step = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            step = -np.linalg.lstsq(J, r, rcond=None)[0]
        damp = 1.0
        for _ in range(30):
            cand = theta + damp * step
            r2, lam2, m2 = residual(cand)
            if np.max(np.abs(lam2)) < np.max(np.abs(lam)):
                theta, r, lam, m = cand, r2, lam2, m2
                break
            damp *= 0.5
        else:
            break
        it += 1
    if np.max(np.abs(lam)) > tol:
        best = tuple(gap_point_from_theta(sys, j, theta[j]) for j in range(g))
        raise NonConvergenceError(
            f"Jacobi inversion residual {np.max(np.abs(lam)):.3g} above {tol:.3g}",
            best=InversionSolution(best, lam, m, it),
        )
    pts = tuple(gap_point_from_theta(sys, j, theta[j]) for j in range(g))
    return InversionSolution(pts, lam, m, it)


def _single_gap_abel(charts, j, th, g):
    th = float(th) % (2.0 * np.pi)
    if th <= np.pi:
        s, tt = 1.0, th
    else:
        s, tt = -1.0, 2.0 * np.pi - th
    u = 2.0 * tt / np.pi - 1.0
    return s * np.array([C.chebval(u, charts[j][k]) for k in range(g)])
