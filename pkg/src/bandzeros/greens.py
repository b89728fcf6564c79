"""Green's-function machinery: r_inf, r_x0, phi(z,inf), phi(z,x0), psi_n.

Multiplicative Green's functions are evaluated as exp of a path integral from
a_1.  For real targets the path follows the upper edge of the real axis (band
segments contribute pure phase, gap segments contribute modulus); for complex
targets the edge walk is continued by a straight leg off the axis.  The
argument of any value is meaningful modulo 2*pi only.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import DomainError, NearDegenerateWarning
from .geometry import IntervalSystem, WeightSpec, eval_H, sqrt_H, sqrt_H_real
from . import quadrature as quad


def _regions(sys):
    """Ordered real-axis regions: ('band', k, lo, hi) / ('gap', r, lo, hi).

    Gap region index r follows the branch-sign convention: sign of sqrt(H) on
    the region is (-1)^(l-r), with r = l right of a_{2l} and r = 0 left of a_1.
    """
    out = []
    for k, (lo, hi) in enumerate(sys.bands):
        out.append(("band", k + 1, lo, hi))
        if k + 1 < sys.l:
            out.append(("gap", k + 1, hi, sys.bands[k + 1][0]))
    return out


def _band_density(sys, numer, k):
    """Density numer/sqrt(H)+ on band k (1-based): purely imaginary factor."""
    sign = (-1.0) ** (sys.l - k)

    def f(x):
        return numer(x) * (-1j) * sign / np.sqrt(-eval_H(sys, x))

    return f


def _gap_density(sys, numer, r):
    sign = (-1.0) ** (sys.l - r)

    def f(x):
        return numer(x) * sign / np.sqrt(eval_H(sys, x))

    return f


def edge_integral(sys, numer, x_t, pole=None, tol=1e-12):
    """Integral of numer(x)/((x-pole) sqrt(H)) from a_1 to real x_t, upper edge.

    A pole crossed on a gap or outside segment is taken as a principal value
    plus the -i*pi half-residue of the upward detour.
    """
    a = sys.endpoints
    if sys.in_E(x_t) and sys.band_of(x_t) is not None:
        pass  # boundary targets are fine; the band partial handles them
    total = 0.0 + 0.0j
    if x_t < a[0]:
        f = _gap_density(sys, numer, 0)
        g = f if pole is None else (lambda x: f(x) / (x - pole))
        # integrate from x_t to a_1 then negate; sqrt singularity at a_1
        return -complex(quad.complex_band_integral(g, (x_t, a[0]), tol=tol))

    for kind, idx, lo, hi in _regions(sys):
        if x_t <= lo:
            break
        seg_hi = min(hi, x_t)
        if kind == "band":
            f = _band_density(sys, numer, idx)
            g = f if pole is None else (lambda x, f=f: f(x) / (x - pole))
            if seg_hi >= hi:
                total += quad.complex_band_integral(g, (lo, hi), tol=tol)
            else:
                total += 1j * quad.partial_integral(
                    lambda x, g=g: np.imag(g(x)), (lo, hi), seg_hi, tol=tol
                )
        else:
            f = _gap_density(sys, numer, idx)
            total += _real_segment(f, (lo, hi), seg_hi, pole, tol)
        if x_t <= hi:
            return total
    if x_t > a[-1]:
        f = _gap_density(sys, numer, sys.l)
        total += _real_segment(f, (a[-1], x_t), x_t, pole, tol)
    return total


def _real_segment(f, interval, seg_hi, pole, tol):
    """Real-axis segment from interval[0] to seg_hi with optional pole."""
    lo, hi = interval
    if pole is None or not (lo < pole < seg_hi):
        g = f if pole is None else (lambda x: f(x) / (x - pole))
        if seg_hi >= hi:
            return quad.gap_integral(g, (lo, hi), tol=tol)
        return quad.partial_integral(g, (lo, hi), seg_hi, tol=tol)
    # principal value with upward half-circle detour over the pole
    f0 = float(np.real(np.asarray(f(np.array([pole])))[0]))

    def sub(x):
        num = np.asarray(f(x)) - f0
        return np.where(x == pole, 0.0, num / (x - pole))

    if seg_hi >= hi:
        base = quad.gap_integral(sub, (lo, hi), tol=tol)
    else:
        base = quad.partial_integral(sub, (lo, hi), seg_hi, tol=tol)
    return base + f0 * np.log(abs((seg_hi - pole) / (pole - lo))) - 1j * np.pi * f0


def path_integral(sys, numer, z, pole=None, tol=1e-12):
    """Integral of numer/((z-pole) sqrt(H)) from a_1 to complex z, cut-avoiding.

    Real targets use edge_integral; complex targets continue the edge walk with
    a straight leg.  Conjugate symmetry handles the lower half plane.
    """
    z = complex(z)
    if z.imag == 0.0:
        return edge_integral(sys, numer, z.real, pole=pole, tol=tol)
    if z.imag < 0.0:
        conj_numer = lambda w: np.conj(numer(np.conj(w)))
        val = path_integral(
            sys, conj_numer, np.conj(z), pole=None if pole is None else pole, tol=tol
        )
        return np.conj(val)

    a = sys.endpoints
    if z.real <= a[0]:
        anchor = a[0]
        base = 0.0 + 0.0j
        sqrt_at_start = True
    else:
        anchor = min(z.real, a[-1])
        # avoid anchoring exactly on a branch point
        bp = min(a, key=lambda p: abs(p - anchor))
        sqrt_at_start = False
        if abs(bp - anchor) < 1e-9 * max(1.0, sys.span):
            anchor = bp
            sqrt_at_start = True
        base = edge_integral(sys, numer, anchor, pole=pole, tol=tol)

    def dens(w):
        out = numer(w) / sqrt_H(sys, w)
        if pole is not None:
            out = out / (w - pole)
        return out

    leg = quad.segment_integral(
        dens, complex(anchor, 0.0), z, sqrt_at_start=sqrt_at_start, tol=tol
    )
    return base + leg


@dataclass(frozen=True)
class RInfinity:
    """Monic degree l-1 polynomial with vanishing gap integrals of r/sqrt(H)."""

    coeffs: np.ndarray            # ascending, length l
    condition_number: float

    def __call__(self, x):
        return P.polyval(np.asarray(x), self.coeffs)


def compute_r_inf(sys: IntervalSystem) -> RInfinity:
    """Solve the gap conditions for the monic polynomial of phi(z, inf)."""
    l = sys.l
    if l == 1:
        return RInfinity(np.array([1.0]), 1.0)
    rows = []
    rhs = []
    for j, gap in enumerate(sys.gaps):
        f = _gap_density(sys, lambda x: np.ones_like(x), j + 1)
        moments = [
            quad.gap_integral(lambda x, s=s, f=f: x**s * f(x), gap)
            for s in range(l)
        ]
        rows.append(moments[: l - 1])
        rhs.append(-moments[l - 1])
    M = np.array(rows)
    cond = float(np.linalg.cond(M))
    c = np.linalg.solve(M, np.array(rhs))
    return RInfinity(np.append(c, 1.0), cond)


def harmonic_measures(sys: IntervalSystem, r_inf: RInfinity | None = None):
    """omega_k = integral over E_k of r_inf/h; positive, summing to 1."""
    r_inf = r_inf or compute_r_inf(sys)
    out = []
    for k, band in enumerate(sys.bands):
        sign = (-1.0) ** (sys.l - (k + 1))
        val = quad.band_integral(
            lambda x: r_inf(x) * sign / (np.pi * np.sqrt(-eval_H(sys, x))), band
        )
        out.append(val)
    return np.array(out)


def green_phi_inf(sys: IntervalSystem, z, r_inf: RInfinity | None = None):
    """phi(z, inf) = exp(int from a_1 to z of r_inf/sqrt(H))."""
    z = complex(z)
    if z.imag == 0.0 and sys.in_E(z.real):
        raise DomainError("phi(z, inf) is undefined on E")
    r_inf = r_inf or compute_r_inf(sys)
    return complex(np.exp(path_integral(sys, r_inf, z)))


@dataclass(frozen=True)
class RX0:
    """Numerator data of phi(z, x0): r_x0 in P_{l-1} plus companion M_x0."""

    x0: float
    coeffs: np.ndarray            # ascending, length l
    M_coeffs: np.ndarray          # ascending, length l (monic degree l-1)
    identity_residual: float
    flagged: bool = False

    def __call__(self, x):
        return P.polyval(np.asarray(x), self.coeffs)

    def M(self, x):
        return P.polyval(np.asarray(x), self.M_coeffs)


def compute_r_x0(sys: IntervalSystem, x0, r_inf: RInfinity | None = None) -> RX0:
    """Solve eq r(x0) = -sqrt(H(x0)) plus the l-1 principal-value conditions."""
    x0 = float(x0)
    if sys.in_E(x0):
        raise DomainError("x0 must lie off E")
    l = sys.l
    r_inf = r_inf or compute_r_inf(sys)
    span = sys.span
    flagged = min(abs(x0 - a) for a in sys.endpoints) < 1e-8
    sH0 = sqrt_H_real(sys, x0)

    rows = [[x0**s for s in range(l)]]
    rhs = [-sH0]
    gap_of_pole = sys.gap_of(x0)
    for j, gap in enumerate(sys.gaps):
        f = _gap_density(sys, lambda x: np.ones_like(x), j + 1)
        row = []
        with warnings.catch_warnings():
            if flagged:
                warnings.simplefilter("ignore", NearDegenerateWarning)
            for s in range(l):
                g = lambda x, s=s, f=f: x**s * f(x)
                if gap_of_pole == j:
                    row.append(quad.pv_gap_integral(g, gap, x0))
                else:
                    row.append(quad.gap_integral(lambda x, g=g: g(x) / (x - x0), gap))
        rows.append(row)
        rhs.append(0.0)
    coeffs = np.linalg.solve(np.array(rows), np.array(rhs))

    # companion M_x0 (monic, degree l-1) from the gap moment conditions
    if l == 1:
        M_coeffs = np.array([1.0])
    else:
        Mrows, Mrhs = [], []
        for j, gap in enumerate(sys.gaps):
            f = _gap_density(sys, lambda x: np.ones_like(x), j + 1)
            moments = [
                quad.gap_integral(lambda x, s=s, f=f: x**s * f(x), gap)
                for s in range(l)
            ]
            with warnings.catch_warnings():
                if flagged:
                    warnings.simplefilter("ignore", NearDegenerateWarning)
                if gap_of_pole == j:
                    pv = quad.pv_gap_integral(f, gap, x0)
                else:
                    pv = quad.gap_integral(lambda x: f(x) / (x - x0), gap)
            Mrows.append(moments[: l - 1])
            Mrhs.append(-sH0 * pv - moments[l - 1])
        M_coeffs = np.append(np.linalg.solve(np.array(Mrows), np.array(Mrhs)), 1.0)

    # representation identity r_x0 = (xi - x0)(r_inf - M_x0) - sqrt(H(x0))
    diff = P.polysub(r_inf.coeffs, M_coeffs)
    rhs_poly = P.polysub(P.polymul(np.array([-x0, 1.0]), diff), np.array([sH0]))
    resid = float(np.max(np.abs(P.polysub(coeffs, rhs_poly))))
    scale = max(1.0, float(np.max(np.abs(coeffs))))
    return RX0(x0, coeffs, M_coeffs, resid / scale, flagged)


def green_phi_x0(sys: IntervalSystem, z, x0, rx0: RX0 | None = None):
    """phi(z, x0) = exp(int of r_x0/((xi-x0) sqrt(H))) from a_1 to z."""
    z = complex(z)
    x0 = float(x0)
    if z.imag == 0.0 and sys.in_E(z.real):
        raise DomainError("phi(z, x0) is undefined on E")
    if z == complex(x0):
        raise DomainError("z coincides with the pole x0")
    rx0 = rx0 or compute_r_x0(sys, x0)
    return complex(np.exp(path_integral(sys, rx0, z, pole=x0)))


@dataclass(frozen=True)
class PsiFunction:
    """The product of Green's-function powers representing a Pell pair.

    psi(z) multiplies phi(z,inf)^e_inf, phi(z,w_j)^(nu_j eps_j) and
    phi(z,x_{j,n})^(delta_{j,n}); chi(x) is the accumulated boundary argument
    of psi+ along the upper edge of E.
    """

    system: IntervalSystem
    n: int
    e_inf: int
    factors: tuple                # of (pole RX0 or None for inf, exponent)
    r_inf: RInfinity

    def log_psi(self, z):
        z = complex(z)
        total = self.e_inf * path_integral(self.system, self.r_inf, z)
        for rx0, expo in self.factors:
            total += expo * path_integral(self.system, rx0, z, pole=rx0.x0)
        return total

    def __call__(self, z):
        return complex(np.exp(self.log_psi(z)))

    def boundary_abs(self, x):
        """|psi+| at x on E; should be 1."""
        total = self.e_inf * edge_integral(self.system, self.r_inf, float(x))
        for rx0, expo in self.factors:
            total += expo * edge_integral(self.system, rx0, float(x), pole=rx0.x0)
        return float(np.exp(total.real))

    def chi(self, x):
        """Accumulated boundary argument of psi+ at x on E."""
        total = self.e_inf * edge_integral(self.system, self.r_inf, float(x))
        for rx0, expo in self.factors:
            total += expo * edge_integral(self.system, rx0, float(x), pole=rx0.x0)
        return float(total.imag)


def build_psi(spec: WeightSpec, n: int, pell) -> PsiFunction:
    """Assemble psi_n for a Bernstein-Szego weight from verified Pell data."""
    if not spec.is_bernstein_szego:
        raise ValueError("psi_n requires a Bernstein-Szego weight")
    sys = spec.system
    rho = spec.weight
    for w, _, _ in rho.roots:
        if w.imag != 0.0:
            raise DomainError("psi_n with complex rho roots is not supported")
    dR = spec.factorization.deg_R
    nu = rho.degree
    dg = sys.l - 1
    e_inf = 2 * n + dR - (nu + dg)
    if e_inf < 0:
        raise ValueError("degree bookkeeping requires 2n + deg R >= nu + deg g")
    r_inf = compute_r_inf(sys)
    factors = []
    for w, m, s in rho.roots:
        factors.append((compute_r_x0(sys, w.real, r_inf), m * s))
    for x_jn, d_jn in zip(pell.gap_points, pell.gap_signs):
        factors.append((compute_r_x0(sys, float(x_jn), r_inf), int(d_jn)))
    return PsiFunction(sys, n, e_inf, tuple(factors), r_inf)
