"""Interval systems, the polynomial H and its square-root branch, and weights.

The set E is a union of l closed bands [a_1,a_2], ..., [a_{2l-1},a_{2l}]
separated by open gaps.  H(x) = prod (x - a_k).  The branch of sqrt(H) used
everywhere in the package is analytic on C \\ E and positive on (a_{2l}, inf);
on the gap between band k and band k+1 it is real with sign (-1)^(l-k), and its
boundary values on band k from the upper half plane are i*(-1)^(l-k)*sqrt(-H).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, WeightError


@dataclass(frozen=True)
class IntervalSystem:
    """An ordered system of 2l real branch points a_1 < ... < a_{2l}."""

    endpoints: tuple

    def __init__(self, endpoints: Sequence[float]):
        pts = tuple(float(a) for a in endpoints)
        if len(pts) < 2 or len(pts) % 2 != 0:
            raise ValueError("need an even number (>= 2) of endpoints")
        if any(b <= a for a, b in zip(pts, pts[1:])):
            raise ValueError("endpoints must be strictly increasing")
        object.__setattr__(self, "endpoints", pts)

    @property
    def l(self) -> int:
        return len(self.endpoints) // 2

    @property
    def bands(self):
        e = self.endpoints
        return [(e[2 * k], e[2 * k + 1]) for k in range(self.l)]

    @property
    def gaps(self):
        e = self.endpoints
        return [(e[2 * k + 1], e[2 * k + 2]) for k in range(self.l - 1)]

    @property
    def span(self) -> float:
        return self.endpoints[-1] - self.endpoints[0]

    def band_of(self, x, tol=0.0):
        """Index (0-based) of the band containing x, or None."""
        for k, (lo, hi) in enumerate(self.bands):
            if lo - tol <= x <= hi + tol:
                return k
        return None

    def gap_of(self, x):
        """Index (0-based) of the open gap containing x, or None."""
        for j, (lo, hi) in enumerate(self.gaps):
            if lo < x < hi:
                return j
        return None

    def in_E(self, x, tol=0.0) -> bool:
        return self.band_of(x, tol=tol) is not None

    def gap_branch_sign(self, region: int) -> float:
        """Sign of sqrt(H) on the real region right of band `region` (1-based).

        region=l is (a_{2l}, inf), region=0 is (-inf, a_1).
        """
        return (-1.0) ** (self.l - region)


def eval_H(sys: IntervalSystem, x):
    """H(x) = prod over endpoints of (x - a_k); works on scalars and arrays."""
    x = np.asarray(x)
    out = np.ones_like(x, dtype=x.dtype if np.iscomplexobj(x) else float)
    for a in sys.endpoints:
        out = out * (x - a)
    if out.ndim == 0:
        return out[()]
    return out


def sqrt_H(sys: IntervalSystem, z):
    """The branch of sqrt(H) that is positive on (a_{2l}, inf).

    Accepts scalars or arrays; real points on E are rejected (use
    boundary_sqrt_H for boundary values).
    """
    z = np.asarray(z, dtype=complex)
    zr = z.real
    on_axis = z.imag == 0.0
    if np.any(on_axis):
        for lo, hi in sys.bands:
            if np.any(on_axis & (zr >= lo) & (zr <= hi)):
                raise DomainError("sqrt_H is undefined on E; use boundary_sqrt_H")
    # Principal square roots of the factors: the cuts on gaps and left of a_1
    # cancel pairwise, leaving exactly the branch cut E.
    out = np.ones_like(z)
    for a in sys.endpoints:
        out = out * np.sqrt(z - a)
    # force exact realness off the axis cut
    if out.ndim == 0:
        val = out[()]
        if z.imag == 0.0:
            return complex(val.real, 0.0)
        return val
    out[on_axis] = out[on_axis].real
    return out


def sqrt_H_real(sys: IntervalSystem, x):
    """sqrt_H at real points off E, returned as a real number."""
    x = float(x)
    if sys.in_E(x):
        raise DomainError("point lies on E")
    h = 1.0
    for a in sys.endpoints:
        h *= x - a
    if x > sys.endpoints[-1]:
        region = sys.l
    elif x < sys.endpoints[0]:
        region = 0
    else:
        region = sys.gap_of(x) + 1
    return sys.gap_branch_sign(region) * np.sqrt(h)


def boundary_sqrt_H(sys: IntervalSystem, x, side=+1):
    """Boundary value of sqrt_H on int(E_k) as a limit from C+ (side=+1) or C-.

    Returns i*(-1)^(l-k)*sqrt(-H(x)) for side=+1; the two limits are negatives
    of each other.
    """
    k = sys.band_of(x)
    if k is None:
        raise DomainError("point is not on a band")
    sign = (-1.0) ** (sys.l - (k + 1))
    return side * 1j * sign * np.sqrt(-eval_H(sys, float(x)))


def inv_h(sys: IntervalSystem, x):
    """1/h(x) = (-1)^(l-k) / (pi*sqrt(-H(x))) for x interior to band k."""
    k = sys.band_of(x)
    if k is None:
        raise DomainError("point is not on a band")
    sign = (-1.0) ** (sys.l - (k + 1))
    return sign / (np.pi * np.sqrt(-eval_H(sys, float(x))))


@dataclass(frozen=True)
class PolynomialFactorization:
    """A split of the endpoints into the roots of R and of S, with R*S = H."""

    system: IntervalSystem
    R_roots: tuple

    def __init__(self, system: IntervalSystem, R_roots: Sequence[float]):
        rr = tuple(sorted(float(r) for r in R_roots))
        eps = 1e-12 * max(1.0, system.span)
        for r in rr:
            if not any(abs(r - a) <= eps for a in system.endpoints):
                raise ValueError(f"R root {r} is not a system endpoint")
        if len(set(rr)) != len(rr):
            raise ValueError("R roots must be distinct endpoints")
        object.__setattr__(self, "system", system)
        object.__setattr__(self, "R_roots", rr)

    @property
    def S_roots(self):
        eps = 1e-12 * max(1.0, self.system.span)
        return tuple(
            a for a in self.system.endpoints
            if not any(abs(a - r) <= eps for r in self.R_roots)
        )

    @property
    def deg_R(self) -> int:
        return len(self.R_roots)

    @property
    def deg_S(self) -> int:
        return 2 * self.system.l - self.deg_R

    def eval_R(self, x):
        x = np.asarray(x)
        out = np.ones_like(x, dtype=x.dtype if np.iscomplexobj(x) else float)
        for r in self.R_roots:
            out = out * (x - r)
        return out if out.ndim else out[()]

    def eval_S(self, x):
        x = np.asarray(x)
        out = np.ones_like(x, dtype=x.dtype if np.iscomplexobj(x) else float)
        for r in self.S_roots:
            out = out * (x - r)
        return out if out.ndim else out[()]

    def endpoint_zero_counts(self):
        """Number of R-roots among the endpoints of each band (length l)."""
        eps = 1e-12 * max(1.0, self.system.span)
        counts = []
        for lo, hi in self.system.bands:
            c = sum(1 for r in self.R_roots if abs(r - lo) <= eps or abs(r - hi) <= eps)
            counts.append(c)
        return counts


@dataclass(frozen=True)
class SmoothWeight:
    """A black-box weight denominator W, nonzero on E.

    ``smoothness`` is recorded metadata only; it is not verified.
    """

    fn: Callable
    smoothness: str | None = None

    def __call__(self, x):
        return self.fn(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class BernsteinSzegoWeight:
    """rho_nu(x) = scale * prod (x - w_j)^{nu_j} with signs eps_j.

    Complex roots must be closed under conjugation; eps_j = -1 is allowed for
    simple real roots only.
    """

    roots: tuple          # of (w: complex, multiplicity: int, sign: int)
    scale: float = 1.0

    def __init__(self, roots, scale=1.0):
        rts = tuple((complex(w), int(m), int(s)) for w, m, s in roots)
        for w, m, s in rts:
            if m < 1 or s not in (-1, 1):
                raise ValueError("multiplicity must be >= 1 and sign in {-1,+1}")
            if s == -1 and (w.imag != 0.0 or m != 1):
                raise ValueError("sign -1 requires a simple real root")
        # conjugate closure (counted with multiplicity)
        pool = [(w, m) for w, m, _ in rts if w.imag != 0.0]
        for w, m in pool:
            if (complex(w.conjugate()), m) not in pool:
                raise ValueError("complex roots must occur in conjugate pairs")
        if scale == 0.0:
            raise ValueError("scale must be nonzero")
        object.__setattr__(self, "roots", rts)
        object.__setattr__(self, "scale", float(scale))

    @property
    def degree(self) -> int:
        return sum(m for _, m, _ in self.roots)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.full(x.shape, self.scale, dtype=complex)
        for w, m, _ in self.roots:
            out = out * (x - w) ** m
        out = out.real if out.ndim else float(out.real)
        return out

    def derivative(self, x):
        x = complex(x)
        tot = 0.0 + 0.0j
        for i, (w, m, _) in enumerate(self.roots):
            term = self.scale * m * (x - w) ** (m - 1)
            for j, (w2, m2, _) in enumerate(self.roots):
                if j != i:
                    term *= (x - w2) ** m2
            tot += term
        return tot


@dataclass(frozen=True)
class WeightSpec:
    """A weight R/(W h) on E: factorization R*S = H plus a denominator W."""

    factorization: PolynomialFactorization
    weight: SmoothWeight | BernsteinSzegoWeight

    def __post_init__(self):
        if isinstance(self.weight, BernsteinSzegoWeight):
            sys = self.system
            for w, _, _ in self.weight.roots:
                if w.imag == 0.0 and sys.in_E(w.real):
                    raise WeightError(f"Bernstein-Szego root {w.real} lies in E")

    @property
    def system(self) -> IntervalSystem:
        return self.factorization.system

    @property
    def is_bernstein_szego(self) -> bool:
        return isinstance(self.weight, BernsteinSzegoWeight)

    def eval_W(self, x):
        return self.weight(x)


def weight_density(spec: WeightSpec, x):
    """Magnitude of R(x) / (W(x) h(x)) at a point interior to a band.

    The density R/(Wh) is sign-constant on each band; a band where it comes
    out negative is handled by flipping the sign of W there (E is
    disconnected, so any per-band sign pattern is an admissible W).  The
    returned value is therefore the positive orthogonality density.
    """
    sys = spec.system
    k = sys.band_of(x)
    if k is None:
        raise DomainError("weight density is defined on int(E) only")
    lo, hi = sys.bands[k]
    if x == lo or x == hi:
        raise DomainError("weight density is singular at band endpoints")
    w = spec.eval_W(x)
    if w == 0:
        raise WeightError("W vanishes at the evaluation point")
    val = abs(spec.factorization.eval_R(x) * inv_h(sys, x) / w)
    if val == 0:
        raise WeightError(f"weight density vanishes at interior x={x}")
    return float(val)


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    first_failure: float | None = None
    message: str = ""
    samples_per_band: int = 0


def validate(spec: WeightSpec, grid_size: int = 32) -> ValidationReport:
    """Sample R/(Wh) on an interior grid of each band and report positivity."""
    if grid_size < 8:
        raise ValueError("grid_size must be at least 8 per band")
    sys = spec.system
    for lo, hi in sys.bands:
        xs = lo + (hi - lo) * (np.arange(1, grid_size + 1)) / (grid_size + 1)
        for x in xs:
            try:
                weight_density(spec, float(x))
            except WeightError as exc:
                return ValidationReport(False, float(x), str(exc), grid_size)
    return ValidationReport(True, None, "ok", grid_size)
