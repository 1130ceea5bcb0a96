"""Evaluation of the Bellman function ``B_{p,tau}`` on its domain.

Two independent routes are provided.  ``implicit_solve`` works with the
scalar relation ``G(x2, x1) = G(b, s)`` (``p > 2``) or
``G(x1, x2) = G(s, b)`` (``p < 2``), where ``s = x3**(1/p)`` and
``G(z1, z2) = (z1 + z2)**(p-1) * (z1 - (p-1) z2)``; ``characteristic_u``
locates the foot of the characteristic line through ``y`` by bisection.

All array work runs on canonical points (``max(|x1|, |x2|, s) == 1``) in
``numpy.longdouble`` so that the root residual stays below ``1e-12`` even for
large ``p``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import (
    REGION_ORDER, ConvergenceError, DomainError, Params, PointX, PointY, Region,
    RegionError, _CODE, _as_x, _as_y, check_domain, region_codes, to_x,
)

LD = np.longdouble
_EPS_LD = np.finfo(LD).eps
MAX_DOUBLINGS = 200
MAX_ITER = 500
RESIDUAL_RTOL = 1e-12

_IMPLICIT = _CODE[Region.IMPLICIT]
_GLUE = _CODE[Region.GLUING_LINE]
_BOUNDARY = _CODE[Region.BOUNDARY]
_ORIGIN = _CODE[Region.ORIGIN]


@dataclass(frozen=True)
class BellmanValue:
    value: float
    omega: float
    beta: float
    b: float
    region: Region
    residual: float = 0.0
    iterations: int = 0


@dataclass(frozen=True)
class CharacteristicSolution:
    u: float
    beta: float
    M: float


def g_fn(z1, z2, params):
    """``(z1 + z2)**(p-1) * (z1 - (p-1) z2)``."""
    p = params.p
    t = z1 + z2
    if np.any(np.asarray(t) < 0):
        raise DomainError(f"G needs z1 + z2 >= 0, got {z1!r} + {z2!r}")
    return t ** (p - 1.0) * (z1 - (p - 1.0) * z2)


def bellman_p2(x, tau):
    """Closed form at ``p = 2``: ``x2**2 - x1**2 + (1 + tau**2) x3``."""
    x = _as_x(x)
    check_domain(x.x1, x.x2, x.x3, 2.0)
    return x.x2 * x.x2 - x.x1 * x.x1 + (1.0 + tau * tau) * x.x3


# ---------------------------------------------------------------------------
# vectorized core


def _canonical_arrays(x1, x2, x3, p):
    a1 = np.abs(np.asarray(x1))
    a2 = np.abs(np.asarray(x2))
    x3 = np.asarray(x3)
    a1, a2, x3 = np.broadcast_arrays(a1, a2, x3)
    pl = LD(p)
    s = x3.astype(LD) ** (LD(1) / pl)
    r = np.maximum(np.maximum(a1.astype(LD), a2.astype(LD)), s)
    zero = r == 0
    rs = np.where(zero, LD(1), r)
    c1 = a1 / rs
    c2 = a2 / rs
    c3 = x3 / rs ** pl
    return c1, c2, c3, rs, zero


def _solve_b(c1, c2, c3, params):
    """Root ``b`` of the implicit relation on canonical long-double arrays.

    Returns ``(b, s, residual, iterations)``.  The relation is turned into an
    increasing function ``F`` on its bracket; safeguarded Newton started at the
    right end of the bracket, with bisection whenever the step leaves it.
    """
    p = LD(params.p)
    one = LD(1)
    s = c3 ** (one / p)
    n = c1.shape[0]
    iters = np.zeros(n, dtype=np.int64)
    if n == 0:
        return s.copy(), s, s.copy(), iters
    if params.above_two:
        lhs = (c2 + c1) ** (p - one) * (c2 - (p - one) * c1)

        def F(b):
            return (b + s) ** (p - one) * (b - (p - one) * s) - lhs

        def dF(b):
            return p * (b + s) ** (p - 2) * (b - (p - 2) * s)

        lo = (p - one) * s
        hi = lo + one
        k = 0
        while True:
            low = F(hi) < 0
            if not np.any(low):
                break
            k += 1
            if k > MAX_DOUBLINGS:
                raise ConvergenceError("bracket expansion exceeded 200 doublings")
            hi = np.where(low, lo + (hi - lo) * 2, hi)
    else:
        lhs = (c1 + c2) ** (p - one) * (c1 - (p - one) * c2)

        def F(b):
            return lhs - (s + b) ** (p - one) * (s - (p - one) * b)

        def dF(b):
            return p * (p - one) * b * (s + b) ** (p - 2)

        lo = np.zeros_like(s)
        hi = s / (p - one)

    b = hi.copy()
    fb = F(b)
    active = fb != 0
    for it in range(MAX_ITER):
        if not np.any(active):
            break
        iters[active] += 1
        d = dF(b)
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = b - fb / d
        # a converged Newton step must not fall back to a wide bisection
        active = active & ~(np.abs(newton - b) <= 8 * _EPS_LD * (b + s))
        if not np.any(active):
            break
        inside = np.isfinite(newton) & (newton > lo) & (newton < hi)
        cand = np.where(inside, newton, LD(0.5) * (lo + hi))
        fc = F(cand)
        step = np.abs(cand - b)
        pos = fc > 0
        hi = np.where(active & pos, cand, hi)
        lo = np.where(active & ~pos, cand, lo)
        b = np.where(active, cand, b)
        fb = np.where(active, fc, fb)
        tiny = step <= 8 * _EPS_LD * (b + s)
        active = active & (fc != 0) & ~tiny & ((hi - lo) > 4 * _EPS_LD * (b + s))
    else:
        if np.any(active):
            raise ConvergenceError("implicit relation did not converge in 500 iterations")
    resid = np.abs(fb)
    return b, s, resid, iters


@dataclass
class BatchResult:
    """Array output of :func:`evaluate_batch` (original scale)."""

    value: np.ndarray
    b: np.ndarray
    omega: np.ndarray
    beta: np.ndarray
    region: np.ndarray
    residual: np.ndarray
    iterations: np.ndarray


def evaluate_batch(x1, x2, x3, params, *, longdouble=False, route="auto"):
    """Vectorized Bellman evaluation.

    Parameters
    ----------
    x1, x2, x3 : array_like
        Points of the domain (broadcast together).
    params : Params
    longdouble : bool
        Return ``value`` as ``numpy.longdouble`` instead of float64.
    route : {"auto", "explicit", "implicit"}
        ``"auto"`` dispatches on the sector.  The forced routes raise
        ``RegionError`` on points strictly inside the other sector.

    Returns
    -------
    BatchResult
    """
    in_dtype = LD if longdouble else float
    x1 = np.atleast_1d(np.asarray(x1, dtype=in_dtype))
    x2 = np.atleast_1d(np.asarray(x2, dtype=in_dtype))
    x3 = np.atleast_1d(np.asarray(x3, dtype=in_dtype))
    x1, x2, x3 = np.broadcast_arrays(x1, x2, x3)
    shape = x1.shape
    x1, x2, x3 = x1.ravel(), x2.ravel(), x3.ravel()
    check_domain(x1.astype(float), x2.astype(float), x3.astype(float), params.p)
    n = x1.size
    out_dtype = LD if longdouble else float
    nan = np.full(n, np.nan)

    if params.is_p2:
        t2 = LD(params.tau) ** 2
        val = x2.astype(LD) ** 2 - x1.astype(LD) ** 2 + (1 + t2) * x3.astype(LD)
        region = region_codes(x1, x2, x3, params)
        with np.errstate(divide="ignore", invalid="ignore"):
            omega = np.where(x3 > 0, (val / x3) ** (1 / LD(2)), np.nan)
            beta = np.sqrt(omega * omega - t2)
            b = beta * np.sqrt(x3.astype(LD))
        res = BatchResult(val.astype(out_dtype), b.astype(float), omega.astype(float),
                          beta.astype(float), region, np.zeros(n), np.zeros(n, dtype=np.int64))
        return _reshape(res, shape)

    p = LD(params.p)
    tau2 = LD(params.tau) ** 2
    C = ((LD(params.p_star_minus_1)) ** 2 + tau2) ** (p / 2)
    c1, c2, c3, r, zero = _canonical_arrays(x1, x2, x3, params.p)
    region = region_codes(c1.astype(float), c2.astype(float), c3.astype(float), params)
    region = np.where(zero, _ORIGIN, region).astype(np.int8)

    if params.above_two:
        sector = c2 > (p - 1) * c1
    else:
        sector = c2 < c1 / (p - 1)
    glue = region == _GLUE
    implicit = sector & ~glue & ~zero
    explicit = ~implicit & ~zero
    if route == "explicit":
        bad = implicit & (region == _IMPLICIT)
        if np.any(bad):
            raise RegionError("explicit formula requested inside the implicit sector")
        explicit, implicit = ~zero, np.zeros(n, dtype=bool)
    elif route == "implicit":
        bad = explicit & (region == _CODE[Region.EXPLICIT])
        if np.any(bad):
            raise RegionError("implicit relation requested inside the explicit sector")
        implicit, explicit = ~zero, np.zeros(n, dtype=bool)

    val = np.zeros(n, dtype=LD)
    bcan = np.full(n, np.nan, dtype=LD)
    resid = np.zeros(n)
    iters = np.zeros(n, dtype=np.int64)
    s_all = c3 ** (1 / p)

    if np.any(explicit):
        e1, e2, e3 = c1[explicit], c2[explicit], c3[explicit]
        val[explicit] = (e2 * e2 + tau2 * e1 * e1) ** (p / 2) + C * (e3 - e1 ** p)
    if np.any(implicit):
        b, s, rr, it = _solve_b(c1[implicit], c2[implicit], c3[implicit], params)
        if params.above_two:
            lhs = (c2[implicit] + c1[implicit]) ** (p - 1) * (c2[implicit] - (p - 1) * c1[implicit])
        else:
            lhs = (c1[implicit] + c2[implicit]) ** (p - 1) * (c1[implicit] - (p - 1) * c2[implicit])
        if np.any(rr > RESIDUAL_RTOL * (1 + np.abs(lhs))):
            raise ConvergenceError("implicit root residual above tolerance")
        val[implicit] = (b * b + tau2 * s * s) ** (p / 2)
        bcan[implicit] = b
        resid[implicit] = rr.astype(float)
        iters[implicit] = it

    value = val * r ** p
    value = np.where(zero, LD(0), value)
    x3l = x3.astype(LD)
    with np.errstate(divide="ignore", invalid="ignore"):
        omega = np.where(x3 > 0, (value / np.where(x3 > 0, x3l, LD(1))) ** (1 / p), np.nan)
        beta_e = np.sqrt(np.maximum(omega * omega - tau2, 0))
        beta_i = bcan / s_all
        beta = np.where(implicit, beta_i, beta_e)
        b_out = np.where(implicit, bcan * r, beta * s_all * r)
    res = BatchResult(value.astype(out_dtype), b_out.astype(float), omega.astype(float),
                      beta.astype(float), region, resid, iters)
    return _reshape(res, shape)


def _reshape(res, shape):
    for name in ("value", "b", "omega", "beta", "region", "residual", "iterations"):
        setattr(res, name, getattr(res, name).reshape(shape))
    return res


def bellman_values(x1, x2, x3, params, **kw):
    """Shortcut returning only the value array."""
    return evaluate_batch(x1, x2, x3, params, **kw).value


def _scalar(res):
    nanf = lambda a: float(a.ravel()[0])
    return BellmanValue(
        value=nanf(res.value), omega=nanf(res.omega), beta=nanf(res.beta), b=nanf(res.b),
        region=REGION_ORDER[int(res.region.ravel()[0])],
        residual=nanf(res.residual), iterations=int(res.iterations.ravel()[0]),
    )


def bellman_eval(x, params):
    """Bellman value at a single point with solver metadata."""
    x = _as_x(x)
    return _scalar(evaluate_batch(x.x1, x.x2, x.x3, params))


def explicit_value(x, params):
    """Explicit branch ``(x2**2 + tau**2 x1**2)**(p/2) + C (x3 - |x1|**p)``."""
    x = _as_x(x)
    if params.is_p2:
        return bellman_eval(x, params)
    return _scalar(evaluate_batch(x.x1, x.x2, x.x3, params, route="explicit"))


def implicit_solve(x, params):
    """Implicit branch: scalar root ``b`` and ``B = (b**2 + tau**2 s**2)**(p/2)``."""
    x = _as_x(x)
    if params.is_p2:
        raise RegionError("p = 2 has no implicit branch")
    return _scalar(evaluate_batch(x.x1, x.x2, x.x3, params, route="implicit"))


def relation_region(x1, x2, params):
    """Mask of the closed sector where the Burkholder relation holds."""
    a1, a2 = np.abs(x1), np.abs(x2)
    tol = 1e-9 * (1 + a1 + a2)
    if params.above_two or params.is_p2:
        return a2 >= (params.p - 1.0) * a1 - tol
    return a2 <= a1 / (params.p - 1.0) + tol


def burkholder_relation_check(x, params):
    """``|B_tau - (B_0**(2/p) + tau**2 x3**(2/p))**(p/2)|`` at ``x``."""
    x = _as_x(x)
    if not relation_region(x.x1, x.x2, params):
        raise RegionError("point lies outside the region of the relation")
    if params.tau == 0.0:
        return 0.0
    p = params.p
    bt = bellman_eval(x, params).value
    b0 = bellman_eval(x, Params(p, 0.0)).value
    rhs = (b0 ** (2.0 / p) + params.tau ** 2 * x.x3 ** (2.0 / p)) ** (p / 2.0)
    return abs(bt - rhs)


# ---------------------------------------------------------------------------
# characteristic foot


def characteristic_batch(y1, y2, y3, params):
    """Vectorized bisection for the characteristic foot ``u``.

    Inputs are assumed canonical in sign (``x1, x2 >= 0``) and inside the
    implicit sector.  Returns ``(u, beta, M)`` as float64 arrays.
    """
    y1 = np.asarray(y1, dtype=float)
    y2 = np.asarray(y2, dtype=float)
    y3 = np.asarray(y3, dtype=float)
    y1, y2, y3 = np.broadcast_arrays(y1, y2, y3)
    p, tau = params.p, params.tau
    if params.above_two:
        k = (p - 2.0) / p
        lo = k * y1
        hi = y1.copy()
    else:
        k = (2.0 - p) / p
        lo = -y1.copy()
        hi = k * y1
    target = (y2 - k * y1) / y3

    def phi(u):
        with np.errstate(divide="ignore", invalid="ignore"):
            return (u - k * y1) / (y1 - u) ** p

    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    # clamp targets that round outside the bracket image
    below = target <= phi(lo)
    for _ in range(1100):
        mid = 0.5 * (lo + hi)
        moved = (mid != lo) & (mid != hi)
        if not np.any(moved):
            break
        up = phi(mid) < target
        lo = np.where(moved & up, mid, lo)
        hi = np.where(moved & ~up, mid, hi)
    else:
        raise ConvergenceError("characteristic bisection did not terminate")
    u = 0.5 * (lo + hi)
    u = np.where(below, np.where(params.above_two, k * y1, -y1), u)
    d = y1 - u
    beta = (y1 + u) / d
    M = (np.sqrt((y1 + u) ** 2 + tau * tau * d * d) / d) ** p * y3
    return u, beta, M


def characteristic_u(y, params):
    """Foot ``u`` of the characteristic through ``y``, its ``beta`` and value ``M``."""
    y = _as_y(y)
    x = to_x(y, params.p)
    if params.is_p2:
        raise RegionError("p = 2 has no implicit sector")
    a1, a2 = abs(x.x1), abs(x.x2)
    s = x.x3 ** (1.0 / params.p)
    r = max(a1, a2, s)
    if r == 0.0:
        raise RegionError("origin has no characteristic")
    c1, c2, c3 = a1 / r, a2 / r, x.x3 / r ** params.p
    code = int(region_codes(c1, c2, c3, params))
    inside = (c2 > (params.p - 1.0) * c1) if params.above_two else (c2 < c1 / (params.p - 1.0))
    if not inside and REGION_ORDER[code] not in (Region.GLUING_LINE, Region.BOUNDARY):
        raise RegionError("point lies outside the implicit sector")
    if c3 == 0.0:
        raise RegionError("characteristic foot undefined at x3 = 0")
    yy1, yy2 = 0.5 * (c2 + c1), 0.5 * (c2 - c1)
    u, beta, M = characteristic_batch(yy1, yy2, c3, params)
    return CharacteristicSolution(u=float(u) * r, beta=float(beta), M=float(M) * r ** params.p)


def characteristic_fan(params, n_lines=16, n_points=33, y1=1.0, y3_max=None):
    """Polylines of the characteristic fan in the ``(y2, y3)`` plane at fixed ``y1``.

    Each line starts at its foot ``(u, (y1 - u)**p)`` on the boundary and runs
    to ``y3 = y3_max`` or to the edge of the sector, whichever comes first.  Returns rows ``(line, u, y1, y2, y3, M)``.
    """
    if params.is_p2:
        raise RegionError("p = 2 has no implicit sector")
    p, tau = params.p, params.tau
    if params.above_two:
        k = (p - 2.0) / p
        feet = np.linspace(k * y1, y1, n_lines + 2)[1:-1]
    else:
        k = (2.0 - p) / p
        feet = np.linspace(-y1, k * y1, n_lines + 2)[1:-1]
    if y3_max is None:
        y3_max = 4.0 * (2.0 * y1) ** p
    edge = y1 if params.above_two else -y1
    rows = []
    for j, u in enumerate(feet):
        d = y1 - u
        # stop where the line leaves the sector (x1 = 0 above two, x2 = 0 below)
        y3_end = min(y3_max, d ** p * (edge - k * y1) / (u - k * y1))
        y3 = np.linspace(d ** p, y3_end, n_points)
        y2 = k * y1 + y3 * (u - k * y1) / d ** p
        M = (np.sqrt((y1 + u) ** 2 + tau * tau * d * d) / d) ** p * y3
        for a, b, m in zip(y2, y3, M):
            rows.append((j, float(u), float(y1), float(a), float(b), float(m)))
    return rows
