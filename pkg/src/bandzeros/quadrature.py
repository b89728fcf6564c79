"""Singularity-aware quadrature on bands, gaps, and tails.

All rules are built on the substitution x = mid + half*cos(theta), which
absorbs inverse-square-root endpoint singularities, followed by Gauss-Legendre
in theta.  Integrands must accept numpy arrays.
"""

from __future__ import annotations

import functools
import warnings
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import NearDegenerateWarning, QuadratureError

DEFAULT_ORDER = 256
DEFAULT_TOL = 1e-11
MAX_ORDER = 4096
NOISE_FLOOR = 1e-9


@functools.lru_cache(maxsize=64)
def _gl(order):
    t, w = leggauss(order)
    return t, w


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and positive weights targeting one band or gap."""

    nodes: np.ndarray
    weights: np.ndarray
    target: tuple
    order: int


def cos_rule(interval, order) -> QuadratureRule:
    """Rule for integrals over [a,b] with the cos-theta substitution built in.

    sum(weights * f(nodes)) approximates the plain integral of f; the sin(theta)
    Jacobian factor that tames endpoint square roots is part of the weights.
    """
    lo, hi = float(interval[0]), float(interval[1])
    t, w = _gl(order)
    theta = 0.5 * np.pi * (t + 1.0)
    wt = 0.5 * np.pi * w
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    nodes = mid + half * np.cos(theta)
    weights = wt * half * np.sin(theta)
    return QuadratureRule(nodes, weights, (lo, hi), order)


def _integrate_once(f, interval, order):
    rule = cos_rule(interval, order)
    vals = np.asarray(f(rule.nodes))
    if not np.all(np.isfinite(vals)):
        raise QuadratureError("integrand is non-finite at an interior node")
    return np.sum(vals * rule.weights)


def _doubling(run, order, tol, label):
    """Order-doubling driver with a stall test for the roundoff noise floor."""
    order = order or DEFAULT_ORDER
    prev = run(order)
    prev_diff = None
    while order < MAX_ORDER:
        order *= 2
        cur = run(order)
        diff = abs(cur - prev)
        scale = max(1.0, abs(cur))
        if diff <= tol * scale:
            return cur
        if prev_diff is not None and diff >= 0.25 * prev_diff:
            # doubling stopped helping; accept if we are at roundoff level
            if diff <= NOISE_FLOOR * scale:
                return cur
        prev, prev_diff = cur, diff
    warnings.warn(f"{label} did not reach the doubling tolerance", stacklevel=4)
    return prev


def _converge(f, interval, order, tol):
    return _doubling(
        lambda o: _integrate_once(f, interval, o), order, tol, "quadrature"
    )


def band_integral(f, band, order=None, tol=DEFAULT_TOL):
    """Integral of f over a band, f allowed (x-a)^(-1/2) endpoint blowup."""
    return float(np.real(_converge(f, band, order, tol)))


def complex_band_integral(f, band, order=None, tol=DEFAULT_TOL):
    return complex(_converge(f, band, order, tol))


def gap_integral(f, gap, order=None, tol=DEFAULT_TOL):
    """Integral of f over a gap; same endpoint handling as band_integral."""
    return float(np.real(_converge(f, gap, order, tol)))


def partial_integral(f, interval, x_end, order=None, tol=DEFAULT_TOL):
    """Integral of f from interval[0] to x_end <= interval[1].

    The cos-theta substitution is taken for the *full* interval so that
    square-root singularities at either interval endpoint stay harmless even
    when x_end sits at the far endpoint.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if not (lo <= x_end <= hi):
        raise ValueError("x_end outside the interval")
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    theta_end = float(np.arccos(np.clip((x_end - mid) / half, -1.0, 1.0)))

    def run(order):
        t, w = _gl(order)
        # theta from theta_end (x=x_end) to pi (x=lo)
        theta = theta_end + (np.pi - theta_end) * 0.5 * (t + 1.0)
        wt = (np.pi - theta_end) * 0.5 * w
        x = mid + half * np.cos(theta)
        vals = np.asarray(f(x)) * half * np.sin(theta)
        if not np.all(np.isfinite(vals)):
            raise QuadratureError("integrand is non-finite at an interior node")
        return np.sum(wt * vals)

    return float(np.real(_doubling(run, order, tol, "partial quadrature")))


def pv_gap_integral(f, gap, x0, order=None, tol=DEFAULT_TOL):
    """Principal value of integral f(x)/(x-x0) over the gap, x0 inside it.

    Uses singularity subtraction: the smooth part (f(x)-f(x0))/(x-x0) goes
    through gap_integral, the rest has the closed form f(x0)*log|(b-x0)/(x0-a)|.
    """
    lo, hi = float(gap[0]), float(gap[1])
    if not (lo < x0 < hi):
        raise ValueError("principal-value pole must lie strictly inside the gap")
    if min(x0 - lo, hi - x0) < 1e-8:
        warnings.warn(
            "pole within 1e-8 of a gap endpoint", NearDegenerateWarning, stacklevel=2
        )
    f0 = float(np.asarray(f(np.array([x0])))[0])

    def g(x):
        num = np.asarray(f(x)) - f0
        return np.where(x == x0, 0.0, num / (x - x0))

    return gap_integral(g, gap, order, tol) + f0 * np.log(abs((hi - x0) / (x0 - lo)))


def tail_integral(f, start, side=+1, order=None, tol=DEFAULT_TOL, scale=1.0):
    """Improper integral of f over (start, inf) (side=+1) or (-inf, start).

    f may blow up like 1/sqrt(|x-start|) at the finite end and must decay at
    least like |x|^-2; the decay is checked empirically.
    """
    start = float(start)
    d = max(1.0, abs(start), scale)
    # probe far out so the asymptotic power law has set in
    p1 = start + side * 100.0 * d
    p2 = start + side * 400.0 * d
    f1 = abs(np.asarray(f(np.array([p1])))[0])
    f2 = abs(np.asarray(f(np.array([p2])))[0])
    if f1 > 0 and f2 * 16.0 > 3.0 * f1:
        raise QuadratureError("integrand decays slower than t^-2; tail diverges")

    def run(order):
        t, w = _gl(order)
        theta = 0.5 * np.pi * (t + 1.0)
        wt = 0.5 * np.pi * w
        u = 0.5 * (1.0 + np.cos(theta))          # u in (0,1); u=1 at finite end
        x = start + side * scale * (1.0 - u) / u
        jac = side * scale / u**2 * 0.5 * np.sin(theta)
        vals = np.asarray(f(x)) * jac
        if not np.all(np.isfinite(vals)):
            raise QuadratureError("integrand is non-finite at an interior node")
        return np.sum(wt * vals) * side

    return float(np.real(_doubling(run, order, tol, "tail quadrature")))


def segment_integral(f, z0, z1, sqrt_at_start=False, order=None, tol=DEFAULT_TOL):
    """Complex line integral of f along the straight segment z0 -> z1.

    With sqrt_at_start, a 1/sqrt(z-z0) singularity at z0 is absorbed by the
    substitution z = z0 + (z1-z0)*t^2.
    """
    z0, z1 = complex(z0), complex(z1)

    def run(order):
        t, w = _gl(order)
        s = 0.5 * (t + 1.0)
        ws = 0.5 * w
        if sqrt_at_start:
            z = z0 + (z1 - z0) * s**2
            jac = 2.0 * (z1 - z0) * s
        else:
            z = z0 + (z1 - z0) * s
            jac = (z1 - z0) * np.ones_like(s)
        vals = np.asarray(f(z)) * jac
        if not np.all(np.isfinite(vals)):
            raise QuadratureError("integrand is non-finite at an interior node")
        return np.sum(ws * vals)

    return complex(_doubling(run, order, tol, "segment quadrature"))
