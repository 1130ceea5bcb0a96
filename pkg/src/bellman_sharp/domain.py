"""Parameters, coordinates and domain bookkeeping shared by every module.

Points live in the set ``x3 >= 0, |x1|**p <= x3``.  The rotated
coordinates ``y1 = (x2 + x1)/2, y2 = (x2 - x1)/2, y3 = x3`` are used by the
characteristic machinery.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

DOMAIN_RTOL = 1e-12
REGION_TOL = 1e-9
P2_TOL = 1e-8


class BellmanError(Exception):
    """Base class for all package errors."""


class DomainError(BellmanError, ValueError):
    pass


class RegionError(BellmanError, ValueError):
    pass


class ConvergenceError(BellmanError, RuntimeError):
    pass


class GridError(BellmanError, ValueError):
    pass


class HypothesisError(BellmanError, ValueError):
    pass


class ShapeError(BellmanError, ValueError):
    pass


class AuditFailure(BellmanError, AssertionError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class Params:
    """Exponent ``p`` and perturbation ``tau`` with the derived constants.

    Attributes
    ----------
    p_star_minus_1 : float
        ``max(p - 1, 1/(p - 1))``.
    c_sharp : float
        ``((p* - 1)**2 + tau**2)**(p/2)``, the value at ``(0, 0, 1)``.
    gamma : float
        ``(1 - tau**2)/(1 + tau**2)``.
    alpha_glue : float
        Amplitude of the ``u`` piece of the two-variable majorant.
    """

    p: float
    tau: float = 0.0
    p_star_minus_1: float = field(init=False)
    c_sharp: float = field(init=False)
    gamma: float = field(init=False)
    alpha_glue: float = field(init=False)

    def __post_init__(self):
        p = float(self.p)
        tau = float(self.tau)
        if not math.isfinite(p) or p <= 1.0:
            raise DomainError(f"p must be finite and > 1, got {p!r}")
        if not math.isfinite(tau):
            raise DomainError(f"tau must be finite, got {tau!r}")
        if p < 2.0 and abs(tau) > 0.5:
            raise DomainError(f"|tau| <= 1/2 is required when p < 2, got tau={tau!r}")
        ps = max(p - 1.0, 1.0 / (p - 1.0))
        pstar = ps + 1.0
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "p_star_minus_1", ps)
        object.__setattr__(self, "c_sharp", (ps * ps + tau * tau) ** (p / 2.0))
        object.__setattr__(self, "gamma", (1.0 - tau * tau) / (1.0 + tau * tau))
        # exp/log keeps the (p-2)/2 power well defined at every tau
        log_alpha = (math.log(p) + (p - 1.0) * math.log(1.0 - 1.0 / pstar)
                     + 0.5 * (p - 2.0) * math.log1p(tau * tau / (ps * ps)))
        object.__setattr__(self, "alpha_glue", math.exp(log_alpha))

    @property
    def is_p2(self):
        return abs(self.p - 2.0) <= P2_TOL

    @property
    def above_two(self):
        return self.p > 2.0


@dataclass(frozen=True)
class PointX:
    x1: float
    x2: float
    x3: float

    def as_tuple(self):
        return (self.x1, self.x2, self.x3)


@dataclass(frozen=True)
class PointY:
    y1: float
    y2: float
    y3: float

    def as_tuple(self):
        return (self.y1, self.y2, self.y3)


class Region(str, enum.Enum):
    BOUNDARY = "Boundary"
    GLUING_LINE = "GluingLine"
    EXPLICIT = "Explicit"
    IMPLICIT = "Implicit"
    ORIGIN = "Origin"


def _as_x(x):
    if isinstance(x, PointX):
        return x
    x1, x2, x3 = x
    return PointX(float(x1), float(x2), float(x3))


def _as_y(y):
    if isinstance(y, PointY):
        return y
    y1, y2, y3 = y
    return PointY(float(y1), float(y2), float(y3))


def in_domain(x1, x2, x3, p):
    """Vectorized membership test with the relative slack ``DOMAIN_RTOL``."""
    x1 = np.asarray(x1, dtype=float)
    x3 = np.asarray(x3, dtype=float)
    ok = np.isfinite(x1) & np.isfinite(np.asarray(x2, dtype=float)) & np.isfinite(x3)
    return ok & (x3 >= 0.0) & (np.abs(x1) ** p <= x3 * (1.0 + DOMAIN_RTOL))


def check_domain(x1, x2, x3, p):
    ok = in_domain(x1, x2, x3, p)
    if not np.all(ok):
        bad = np.flatnonzero(~np.atleast_1d(ok))[0]
        pts = np.broadcast_arrays(np.atleast_1d(x1), np.atleast_1d(x2), np.atleast_1d(x3))
        w = tuple(float(a[bad]) for a in pts)
        raise DomainError(f"point {w} violates x3 >= 0, |x1|^p <= x3 for p={p}")


def to_y(x, p=None):
    """Rotate to ``(y1, y2, y3)``; the domain is checked when ``p`` is given."""
    x = _as_x(x)
    if p is not None:
        check_domain(x.x1, x.x2, x.x3, p)
    return PointY(0.5 * (x.x2 + x.x1), 0.5 * (x.x2 - x.x1), x.x3)


def to_x(y, p=None):
    y = _as_y(y)
    x = PointX(y.y1 - y.y2, y.y1 + y.y2, y.y3)
    if p is not None:
        check_domain(x.x1, x.x2, x.x3, p)
    return x


def canonicalize(x, params):
    """Fold signs away and rescale so ``max(|x1|, |x2|, x3**(1/p)) == 1``.

    Returns ``(canonical_point, r)`` with ``B(x) == r**p * B(canonical)``.
    The origin maps to itself with ``r = 1``.
    """
    x = _as_x(x)
    p = params.p if isinstance(params, Params) else float(params)
    check_domain(x.x1, x.x2, x.x3, p)
    a1, a2 = abs(x.x1), abs(x.x2)
    s = x.x3 ** (1.0 / p)
    r = max(a1, a2, s)
    if r == 0.0:
        return PointX(0.0, 0.0, 0.0), 1.0
    rp = r ** p
    # r**p underflows for tiny points; the ratio form stays finite
    c3 = x.x3 / rp if rp > 0.0 else (s / r) ** p
    return PointX(a1 / r, a2 / r, c3), r


def region_codes(x1, x2, x3, params):
    """Vectorized region tags as small integers (see ``REGION_ORDER``)."""
    a1 = np.abs(np.asarray(x1, dtype=float))
    a2 = np.abs(np.asarray(x2, dtype=float))
    x3 = np.asarray(x3, dtype=float)
    p = params.p
    out = np.full(np.broadcast(a1, a2, x3).shape, _CODE[Region.EXPLICIT], dtype=np.int8)
    if not params.is_p2:
        if params.above_two:
            out = np.where(a2 > (p - 1.0) * a1, _CODE[Region.IMPLICIT], out)
        else:
            out = np.where(a2 < a1 / (p - 1.0), _CODE[Region.IMPLICIT], out)
        glue = np.abs(a2 - params.p_star_minus_1 * a1) <= REGION_TOL * (1.0 + a1 + a2)
        out = np.where(glue, _CODE[Region.GLUING_LINE], out)
    bnd = np.abs(x3 - a1 ** p) <= REGION_TOL * (1.0 + x3)
    out = np.where(bnd, _CODE[Region.BOUNDARY], out)
    origin = (a1 == 0.0) & (a2 == 0.0) & (x3 == 0.0)
    return np.where(origin, _CODE[Region.ORIGIN], out).astype(np.int8)


REGION_ORDER = (Region.BOUNDARY, Region.GLUING_LINE, Region.EXPLICIT,
                Region.IMPLICIT, Region.ORIGIN)
_CODE = {r: i for i, r in enumerate(REGION_ORDER)}


def classify_region(x, params):
    """Region tag with precedence Boundary > GluingLine > Explicit/Implicit."""
    x = _as_x(x)
    check_domain(x.x1, x.x2, x.x3, params.p)
    return REGION_ORDER[int(region_codes(x.x1, x.x2, x.x3, params))]
