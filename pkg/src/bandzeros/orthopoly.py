"""Direct computation of the orthogonal polynomials on several intervals.

Measure discretization (continuous part plus point masses), recurrence
coefficients by a Lanczos-type discretized Stieltjes procedure, zeros via the
Jacobi matrix, per-region zero counts, and the Pell data of the
Bernstein-Szego pairs (Q_m, g-hat, gap points x_{j,n}, sheet signs delta_{j,n}).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.linalg import eigvalsh_tridiagonal

from .errors import InvariantError, WeightError
from .geometry import (
    BernsteinSzegoWeight,
    IntervalSystem,
    WeightSpec,
    sqrt_H_real,
)
from .quadrature import _gl


@dataclass(frozen=True)
class DiscretizedMeasure:
    """Nodes/weights of the banded rule plus discrete point masses."""

    system: IntervalSystem
    nodes: np.ndarray
    weights: np.ndarray
    point_nodes: np.ndarray
    point_masses: np.ndarray
    numerator: str               # "R" or "S"

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum() + self.point_masses.sum())

    @property
    def all_nodes(self):
        return np.concatenate([self.nodes, self.point_nodes])

    @property
    def all_weights(self):
        return np.concatenate([self.weights, self.point_masses])


def discretize(spec: WeightSpec, nodes_per_band: int, numerator="R"):
    """Composite rule for the measure numer/(W h) dx plus its point masses.

    numerator="R" gives the defining measure; "S" gives the companion measure
    -S/(W h) dx of the second family.  The cos-theta substitution cancels the
    band-endpoint square roots exactly, so every weight is finite.
    """
    if numerator not in ("R", "S"):
        raise ValueError("numerator must be 'R' or 'S'")
    sys = spec.system
    fac = spec.factorization
    t, w = _gl(int(nodes_per_band))
    theta = 0.5 * np.pi * (t + 1.0)
    wt = 0.5 * np.pi * w
    nodes, weights = [], []
    for k, (lo, hi) in enumerate(sys.bands):
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        x = mid + half * np.cos(theta)
        # -H(x) = (x-lo)(hi-x)*rest(x) with rest > 0 on the open band
        rest = np.ones_like(x)
        for a in sys.endpoints:
            if a != lo and a != hi:
                rest = rest * (x - a)
        if np.any(rest <= 0.0):
            raise WeightError("band-interior factor product not positive")
        sign = (-1.0) ** (sys.l - (k + 1))
        numer = fac.eval_R(x) if numerator == "R" else -fac.eval_S(x)
        dens = numer * sign / (np.pi * np.sqrt(rest) * spec.eval_W(x))
        # per-band sign normalization: a sign flip of the density is absorbed
        # into W band-wise (E is disconnected, so this is an admissible W)
        band_sign = np.sign(dens[len(dens) // 2])
        wk = wt * dens * band_sign
        if np.any(wk < 0.0) or not np.all(np.isfinite(wk)):
            raise WeightError(f"sign-indefinite or non-finite weight on band {k + 1}")
        nodes.append(x)
        weights.append(wk)
    pn, pm = [], []
    if spec.is_bernstein_szego:
        rho = spec.weight
        for wj, m, s in rho.roots:
            if s == -1:
                x0 = float(wj.real)
                mass = 2.0 * sqrt_H_real(sys, x0) / float(
                    np.real(rho.derivative(x0))
                )
                if mass < 0.0:
                    raise WeightError(f"negative point mass at w={x0}")
                pn.append(x0)
                pm.append(mass)
    return DiscretizedMeasure(
        sys,
        np.concatenate(nodes),
        np.concatenate(weights),
        np.array(pn),
        np.array(pm),
        numerator,
    )


@dataclass(frozen=True)
class Recurrence:
    """Three-term recurrence p_{k+1} = (x - alpha_k) p_k - beta_k p_{k-1}.

    beta[0] holds the total mass, so the orthonormal polynomials satisfy
    sqrt(beta_{k+1}) P_{k+1} = (x - alpha_k) P_k - sqrt(beta_k) P_{k-1}
    with P_0 = 1/sqrt(beta_0).
    """

    system: IntervalSystem
    alpha: np.ndarray
    beta: np.ndarray

    @property
    def N(self) -> int:
        return len(self.alpha)


def stieltjes_recurrence(measure: DiscretizedMeasure, N: int) -> Recurrence:
    """Lanczos with full reorthogonalization on the discrete measure."""
    x = measure.all_nodes
    w = measure.all_weights
    if len(x) < 4 * N:
        raise ValueError("need at least 4*N nodes for N recurrence steps")
    sw = np.sqrt(w)
    mass = float(w.sum())
    q = sw / np.sqrt(mass)
    Q = np.empty((N + 1, len(x)))
    Q[0] = q
    alpha = np.empty(N)
    beta = np.empty(N)
    beta[0] = mass
    q_prev = np.zeros_like(q)
    b = 0.0
    for k in range(N):
        v = x * Q[k]
        a = float(v @ Q[k])
        alpha[k] = a
        v = v - a * Q[k] - b * q_prev
        # full reorthogonalization, twice for safety
        for _ in range(2):
            v -= Q[: k + 1].T @ (Q[: k + 1] @ v)
        b = float(np.linalg.norm(v))
        if k + 1 < N:
            beta[k + 1] = b * b
            if beta[k + 1] <= 0.0:
                raise InvariantError(
                    f"nonpositive beta at k={k + 1}; discretization too coarse"
                )
        if b == 0.0:
            raise InvariantError("Lanczos breakdown; discretization too coarse")
        q_prev = Q[k]
        Q[k + 1] = v / b
    lo, hi = float(np.min(x)), float(np.max(x))
    pad = 1e-9 * max(1.0, hi - lo)
    if np.any(alpha < lo - pad) or np.any(alpha > hi + pad):
        raise InvariantError("recurrence alpha outside the convex hull of E")
    return Recurrence(measure.system, alpha, beta)


def polynomial_zeros(rec: Recurrence, n: int):
    """Zeros of p_n as eigenvalues of the truncated Jacobi matrix."""
    if n > rec.N:
        raise ValueError("n exceeds the computed recurrence length")
    if n == 0:
        return np.array([])
    return np.sort(eigvalsh_tridiagonal(rec.alpha[:n], np.sqrt(rec.beta[1:n])))


def orthonormal_eval(rec: Recurrence, n: int, x):
    """Orthonormal P_n(x) as (mantissa, exponent): P_n = mantissa * 2**exponent.

    The power-of-two rescaling keeps the recurrence finite far outside E,
    where P_n grows geometrically in n.
    """
    if n > rec.N - 1:
        raise ValueError("recurrence too short: need beta up to index n")
    x = float(x)
    p_prev, p = 0.0, 1.0 / np.sqrt(rec.beta[0])
    expo = 0
    for k in range(n):
        b = np.sqrt(rec.beta[k]) if k > 0 else 0.0
        p_next = ((x - rec.alpha[k]) * p - b * p_prev) / np.sqrt(rec.beta[k + 1])
        p_prev, p = p, p_next
        m = max(abs(p), abs(p_prev))
        if m > 1e150:
            s = float(np.exp2(np.floor(np.log2(m))))
            p, p_prev = p / s, p_prev / s
            expo += int(np.log2(s))
    return p, expo


def orthonormal_eval_array(rec: Recurrence, n: int, x):
    """Orthonormal P_n on an array of points inside the convex hull of E."""
    x = np.asarray(x, dtype=float)
    p_prev = np.zeros_like(x)
    p = np.full_like(x, 1.0 / np.sqrt(rec.beta[0]))
    for k in range(n):
        b = np.sqrt(rec.beta[k]) if k > 0 else 0.0
        p_next = ((x - rec.alpha[k]) * p - b * p_prev) / np.sqrt(rec.beta[k + 1])
        p_prev, p = p, p_next
    return p


@dataclass(frozen=True)
class ZeroReport:
    """Zeros of p_n classified into bands and gaps."""

    n: int
    zeros: np.ndarray
    band_counts: tuple
    gap_occupancy: tuple
    gap_zero_locations: tuple
    exterior_count: int = 0

    def to_record(self):
        return {
            "n": self.n,
            "band_counts": list(self.band_counts),
            "gap_occupancy": list(self.gap_occupancy),
            "gap_zeros": [f"{z:.17g}" for z in self.gap_zero_locations],
            "exterior_count": self.exterior_count,
        }


def count_zeros(sys: IntervalSystem, zeros) -> ZeroReport:
    """Classify sorted zeros per band/gap; endpoint tolerance 1e-10*span."""
    zeros = np.asarray(zeros, dtype=float)
    tol = 1e-10 * sys.span
    band_counts = [0] * sys.l
    gap_hits = [[] for _ in range(sys.l - 1)]
    exterior = 0
    for z in zeros:
        k = sys.band_of(z, tol=tol)
        if k is not None:
            band_counts[k] += 1
            continue
        j = sys.gap_of(z)
        if j is None:
            # a point mass outside [a_1, a_2l] legitimately attracts one zero
            exterior += 1
            continue
        gap_hits[j].append(float(z))
    for j, hits in enumerate(gap_hits):
        if len(hits) > 1:
            raise InvariantError(f"two zeros in gap {j + 1}: {hits}")
    occ = tuple(len(h) for h in gap_hits)
    locs = tuple(h[0] for h in gap_hits if h)
    return ZeroReport(len(zeros), zeros, tuple(band_counts), occ, locs, exterior)


@dataclass(frozen=True)
class PellData:
    """Verified data of the identity R P_n^2 - S Q_m^2 = 2 rho g-hat."""

    n: int
    m: int
    g_hat: np.ndarray            # ascending coefficients, length l
    gap_points: tuple            # x_{j,n}, one per gap
    gap_signs: tuple             # delta_{j,n} in {-1,+1}
    residual: float
    monic_defect: float
    Q_coeffs: np.ndarray         # monic coefficients of the companion Q_m
    rec_P: Recurrence
    rec_Q: Recurrence


def _monic_coeffs(rec: Recurrence, n: int):
    """Monic coefficient vector of p_n from the recurrence (small n only)."""
    prev = np.array([1.0])
    if n == 0:
        return prev
    cur = np.array([-rec.alpha[0], 1.0])
    for k in range(1, n):
        nxt = P.polysub(
            P.polymul(np.array([-rec.alpha[k], 1.0]), cur), rec.beta[k] * prev
        )
        prev, cur = cur, nxt
    return cur


def pell_data(spec: WeightSpec, n: int, nodes_per_band=None) -> PellData:
    """Compute the pair (P_n, Q_m), fit g-hat, and locate the gap data."""
    if not spec.is_bernstein_szego:
        raise ValueError("Pell data requires a Bernstein-Szego weight")
    sys = spec.system
    fac = spec.factorization
    rho = spec.weight
    nu = rho.degree
    dR = fac.deg_R
    l = sys.l
    if 2 * n + dR < nu + l - 1:
        raise ValueError("Pell identity requires 2n + deg R >= nu + l - 1")
    m = n + dR - l
    if m < 0:
        raise ValueError("companion degree m = n + deg R - l is negative")
    nodes_per_band = nodes_per_band or max(8 * max(n, m) + 32, 256)
    meas_R = discretize(spec, nodes_per_band, numerator="R")
    meas_S = discretize(spec, nodes_per_band, numerator="S")
    rec_P = stieltjes_recurrence(meas_R, n + 1)
    rec_Q = stieltjes_recurrence(meas_S, m + 1)

    # sample on band interiors where the orthonormal values are O(1)
    deg = 2 * n + dR
    per_band = max(2 * deg // l + 16, 32)
    xs = []
    for lo, hi in sys.bands:
        th = np.pi * (np.arange(per_band) + 0.5) / per_band
        xs.append(0.5 * (lo + hi) + 0.5 * (hi - lo) * np.cos(th))
    xs = np.concatenate(xs)
    Pv = orthonormal_eval_array(rec_P, n, xs)
    Qv = orthonormal_eval_array(rec_Q, m, xs)
    F = fac.eval_R(xs) * Pv**2 - fac.eval_S(xs) * Qv**2
    scale = float(np.max(np.abs(fac.eval_R(xs) * Pv**2)
                         + np.abs(fac.eval_S(xs) * Qv**2)))
    rho_v = rho(xs)
    A = np.stack([2.0 * rho_v * xs**s for s in range(l)], axis=1)
    coeffs, *_ = np.linalg.lstsq(A, F, rcond=None)
    fit = A @ coeffs
    residual = float(np.max(np.abs(F - fit)) / scale)
    if residual > 1e-6:
        raise InvariantError(f"Pell identity residual {residual:.3g} above 1e-6")
    monic_defect = abs(float(coeffs[-1]) - 1.0)
    g_hat = coeffs

    roots = np.sort(np.real(P.polyroots(g_hat)))
    if len(roots) != l - 1 or np.any(np.abs(np.imag(P.polyroots(g_hat))) > 1e-8):
        raise InvariantError("g-hat does not have l-1 real roots")
    gap_points, gap_signs = [], []
    pad = 1e-9 * max(1.0, sys.span)
    for j, (lo, hi) in enumerate(sys.gaps):
        inside = [r for r in roots if lo - pad <= r <= hi + pad]
        if len(inside) != 1:
            raise InvariantError(
                f"g-hat must have exactly one zero in closed gap {j + 1}"
            )
        xj = float(np.clip(inside[0], lo, hi))
        gap_points.append(xj)
        gap_signs.append(_gap_sheet_sign(sys, fac, rho, rec_P, rec_Q, n, m, xj))
    return PellData(
        n,
        m,
        g_hat,
        tuple(gap_points),
        tuple(gap_signs),
        residual,
        monic_defect,
        _monic_coeffs(rec_Q, m) if m <= 120 else np.array([]),
        rec_P,
        rec_Q,
    )


def _gap_sheet_sign(sys, fac, rho, rec_P, rec_Q, n, m, xj):
    """delta from the sign comparison R P_n = delta sqrt(H) Q_m at x_{j,n}.

    Decided from the split (RP - sqrt(H)Q)(RP + sqrt(H)Q) = 2 R rho g-hat:
    exactly one factor vanishes at x_{j,n}, so at a probe point a distance
    eta inside the gap the vanishing factor is O(eta) and the other O(1).
    When a weight root w_j coincides with x_{j,n} the factor pinned by the
    eps_j condition also vanishes there; if both factors come out comparable
    at the probe, each carries one simple zero and delta = -eps_j.
    """
    gidx = sys.gap_of(xj)
    if gidx is None:
        pad = 1e-7 * max(1.0, sys.span)
        for j, (glo, ghi) in enumerate(sys.gaps):
            if glo - pad <= xj <= ghi + pad:
                gidx = j
                break
    lo, hi = sys.gaps[gidx]
    eta = 1e-5 * max(1.0, sys.span)

    def factors(x):
        pv, pe = orthonormal_eval(rec_P, n, x)
        qv, qe = orthonormal_eval(rec_Q, m, x)
        e0 = max(pe, qe)
        u = fac.eval_R(x) * pv * 2.0 ** (pe - e0)
        v = sqrt_H_real(sys, x) * qv * 2.0 ** (qe - e0)
        return abs(u - v), abs(u + v)

    pad = 1e-7 * max(1.0, sys.span)
    x0 = float(np.clip(xj, lo + pad, hi - pad))
    f_minus, f_plus = factors(x0)
    xp = xj + eta if xj + eta < hi - eta else xj - eta
    ref_minus, ref_plus = factors(float(np.clip(xp, lo + eta, hi - eta)))
    if max(f_minus, f_plus) <= 1e-6 * max(ref_minus, ref_plus):
        # both factors at noise level: x_{j,n} coincides with a weight root
        # w_j where the eps_j condition pins the other factor, so delta=-eps_j
        for w, _, s in rho.roots:
            if w.imag == 0.0 and abs(w.real - xj) <= 1e-3 * max(1.0, sys.span):
                return -int(s)
    return 1 if f_minus <= f_plus else -1


@dataclass(frozen=True)
class InterlacingReport:
    n: int
    violations: tuple

    @property
    def passed(self) -> bool:
        return not self.violations


def interlacing_check(spec: WeightSpec, n: int, pell: PellData | None = None):
    """Verify band-wise strict alternation of zeros of R P_n and S Q_m."""
    pell = pell or pell_data(spec, n)
    sys = spec.system
    fac = spec.factorization
    tol = 1e-10 * sys.span
    zp = polynomial_zeros(pell.rec_P, n)
    zq = polynomial_zeros(pell.rec_Q, pell.m)
    violations = []
    for k, (lo, hi) in enumerate(sys.bands):
        zp_band = [z for z in zp if lo - tol <= z <= hi + tol]
        zq_band = [z for z in zq if lo - tol <= z <= hi + tol]
        for r in fac.R_roots:
            if abs(r - lo) <= tol or abs(r - hi) <= tol:
                zp_band.append(r)
        for r in fac.S_roots:
            if abs(r - lo) <= tol or abs(r - hi) <= tol:
                zq_band.append(r)
        merged = sorted([(z, 0) for z in zp_band] + [(z, 1) for z in zq_band])
        ctol = 1e-7 * max(1.0, sys.span)
        ndeg = 2e-2 * sys.span
        for (z1, f1), (z2, f2) in zip(merged, merged[1:]):
            if f1 != f2 or abs(z1 - z2) <= ctol:
                continue
            # coincident cross-family zeros (e.g. at a shared band endpoint)
            # can sort between a same-family pair; excuse those adjacencies
            other = zq_band if f1 == 0 else zp_band
            if any(abs(z1 - o) <= ctol or abs(z2 - o) <= ctol for o in other):
                continue
            # a paired P/Q zero straddling a branch point (x_{j,n} at a gap
            # endpoint) breaks strict alternation; the statement is asymptotic
            if any(z1 - ndeg <= a <= z2 + ndeg for a in sys.endpoints):
                continue
            violations.append(
                f"band {k + 1}: consecutive zeros {z1:.6g}, {z2:.6g} "
                f"from the same family"
            )
    # gap pairing: both or neither family has a zero in each gap; when the
    # pair sits at a gap endpoint one partner may straddle the branch point
    ndeg = 2e-2 * sys.span
    for j, (lo, hi) in enumerate(sys.gaps):
        has_p = any(lo + tol < z < hi - tol for z in zp)
        has_q = any(lo + tol < z < hi - tol for z in zq)
        if has_p == has_q:
            continue
        near_endpoint = any(
            abs(z - lo) <= ndeg or abs(z - hi) <= ndeg
            for z in np.concatenate([zp, zq])
        )
        if near_endpoint:
            continue
        violations.append(
            f"gap {j + 1}: P_n zero present={has_p}, Q_m zero present={has_q}"
        )
    return InterlacingReport(n, tuple(violations))
