"""Second derivatives of the implicit solution and sign audits.

In the implicit sector the solution satisfies ``H(y1, y2) = y3 * Phi(omega)``
with ``omega = (M/y3)**(1/p)`` and ``beta = sqrt(omega**2 - tau**2)``.
``R1 = 1/Phi'``, ``R2 = -Phi''/Phi'**2`` and ``Lambda = (p-1)Phi' - omega Phi''``.
Derivatives are taken in the rotated coordinates ``y``.
"""
from __future__ import annotations

import enum
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .bellman import LD, evaluate_batch
from .domain import AuditFailure, DomainError, Params, PointY, RegionError, _as_y


class CaseId(str, enum.Enum):
    C1_2 = "C1_2"
    C2_2 = "C2_2"
    C3_2 = "C3_2"
    C1_1 = "C1_1"
    C3_1 = "C3_1"


# (a, b) with Phi(omega) = G(a(beta), b(beta)); both affine in beta
_PHI_ARGS = {
    CaseId.C1_2: ((0.0, 1.0), (1.0, 0.0)),
    CaseId.C3_2: ((1.0, 0.0), (0.0, 1.0)),
    CaseId.C1_1: ((0.0, 1.0), (-1.0, 0.0)),
    CaseId.C3_1: ((1.0, 0.0), (0.0, -1.0)),
}


@dataclass
class AuditReport:
    """Outcome of a sign or inequality scan.

    ``worst_value`` is the sample closest to (or furthest past) violating the
    claim, measured so that positive means violation.
    """

    case: str
    p: float
    tau: float
    n_samples: int
    n_fail: int
    worst_witness: list | None
    worst_value: float
    details: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.n_fail == 0

    def to_dict(self):
        d = asdict(self)
        d.pop("details")
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), default=_jsonable, sort_keys=False)

    def raise_on_fail(self):
        if not self.passed:
            raise AuditFailure(
                f"{self.case}: {self.n_fail}/{self.n_samples} samples violate, "
                f"witness {self.worst_witness}", self)
        return self


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    raise TypeError(type(v))


def make_report(case, params, violation, witnesses, details=None):
    """Build a report from per-sample violation scores (``> 0`` is a failure)."""
    violation = np.asarray(violation, dtype=float)
    n = violation.size
    if n == 0:
        return AuditReport(str(case), params.p, params.tau, 0, 0, None, float("-inf"), details or {})
    k = int(np.nanargmax(np.where(np.isnan(violation), np.inf, violation)))
    wit = [float(w[k]) for w in witnesses]
    nfail = int(np.sum(~(violation <= 0)))
    return AuditReport(str(case.value if isinstance(case, CaseId) else case), params.p,
                       params.tau, n, nfail, wit, float(violation[k]), details or {})


# ---------------------------------------------------------------------------
# partials of G(z1, z2) = (z1 + z2)**(p-1) (z1 - (p-1) z2)


def g_partials(z1, z2, p):
    """``(G, G1, G2, G11, G12, G22)``."""
    t = z1 + z2
    G = t ** (p - 1) * (z1 - (p - 1) * z2)
    G1 = p * t ** (p - 2) * (z1 - (p - 2) * z2)
    G2 = -p * (p - 1) * z2 * t ** (p - 2)
    G11 = p * (p - 1) * t ** (p - 3) * (z1 - (p - 3) * z2)
    G12 = -p * (p - 1) * (p - 2) * z2 * t ** (p - 3)
    G22 = -p * (p - 1) * t ** (p - 3) * (z1 + (p - 1) * z2)
    return G, G1, G2, G11, G12, G22


def _beta_of(omega, tau):
    return np.sqrt(omega * omega - tau * tau)


def _check_beta(case, beta):
    beta = np.asarray(beta)
    if case is CaseId.C2_2:
        raise DomainError("the explicit case has no characteristic function Phi")
    ok = beta > 0
    if case is CaseId.C1_1:
        ok &= beta > 1
    elif case is CaseId.C3_1:
        ok &= beta < 1
    if not np.all(ok):
        raise DomainError(f"beta outside the admissible range of {case.value}")


def phi_suite(case, omega, params):
    """Closed forms ``(Phi, Phi', Lambda)`` of the given case."""
    case = CaseId(case)
    p, tau = params.p, params.tau
    omega = np.asarray(omega, dtype=float) if not isinstance(omega, np.ndarray) else omega
    if np.any(omega < abs(tau)):
        raise DomainError("omega must be at least |tau|")
    b = _beta_of(omega, tau)
    _check_beta(case, b)
    w = omega
    if case is CaseId.C1_2:
        phi = (b + 1) ** (p - 1) * (b - (p - 1))
        dphi = p * w * (b + 1) ** (p - 2) * (1 - (p - 2) / b)
        lam = -p * (p - 2) * w * b ** -3.0 * (b + 1) ** (p - 3) * q_beta(b, params)
    elif case is CaseId.C3_2:
        phi = (1 + b) ** (p - 1) * (1 - (p - 1) * b)
        dphi = -p * (p - 1) * w * (1 + b) ** (p - 2)
        lam = -p * (p - 1) * (p - 2) * w * (1 + b) ** (p - 3) * (b - tau * tau) / b
    elif case is CaseId.C1_1:
        phi = (b - 1) ** (p - 1) * (b + (p - 1))
        dphi = p * w * (b - 1) ** (p - 2) * (1 + (p - 2) / b)
        lam = (-p * (p - 2) * w * (b - 1) ** (p - 3) / b ** 3
               * ((p - 1) * b * b + tau * tau * (b * b + (p - 3) * b + 1)))
    else:
        phi = (1 - b) ** (p - 1) * (1 + (p - 1) * b)
        dphi = -p * (p - 1) * w * (1 - b) ** (p - 2)
        lam = -p * (p - 1) * (p - 2) * w * (1 - b) ** (p - 3) * (1 + tau * tau / b)
    return phi, dphi, lam


def phi_chain(case, omega, params):
    """``(Phi, Phi', Phi'')`` by the chain rule through ``G`` (independent of ``phi_suite``)."""
    case = CaseId(case)
    p, tau = params.p, params.tau
    b = _beta_of(np.asarray(omega, dtype=float), tau)
    _check_beta(case, b)
    (a0, a1), (b0, b1) = _PHI_ARGS[case]
    z1 = a0 + a1 * b
    z2 = b0 + b1 * b
    G, G1, G2, G11, G12, G22 = g_partials(z1, z2, p)
    db = omega / b
    ddb = -tau * tau / b ** 3
    first = G1 * a1 + G2 * b1
    second = G11 * a1 * a1 + 2 * G12 * a1 * b1 + G22 * b1 * b1
    return G, first * db, second * db * db + first * ddb


def q_beta(beta, params):
    p, t2 = params.p, params.tau ** 2
    return (t2 + p - 1) * beta * beta - t2 * (p - 3) * beta + t2


def q_beta_sign(beta, params):
    """``q(beta) = (tau^2 + p - 1) beta^2 - tau^2 (p - 3) beta + tau^2``; positive for ``beta > p - 1``."""
    if np.any(np.asarray(beta) <= params.p - 1):
        raise DomainError("q(beta) is only claimed on beta > p - 1")
    return q_beta(beta, params)


# ---------------------------------------------------------------------------
# second derivatives in the implicit sector


@dataclass(frozen=True)
class SecondDerivs:
    M33: float
    M3i: float
    Mii: float
    D_i: float
    Phi: float
    dPhi: float
    ddPhi: float
    R1: float
    R2: float
    Lambda: float
    H: float
    dH: float
    ddH: float
    i: int = 1


def sector_case(params):
    if params.is_p2:
        raise RegionError("p = 2 has no implicit sector")
    return CaseId.C1_2 if params.above_two else CaseId.C3_2


def _in_sector(x1, x2, params):
    a1, a2 = np.abs(x1), np.abs(x2)
    if params.above_two:
        return a2 > (params.p - 1) * a1
    return a2 < a1 / (params.p - 1)


def second_derivs_batch(y1, y2, y3, params, i=1):
    """Analytic ``M33, M3i, Mii, D_i`` and intermediates as a dict of arrays."""
    if i not in (1, 2):
        raise ValueError("i must be 1 or 2")
    case = sector_case(params)
    p, tau = params.p, params.tau
    y1, y2, y3 = (np.asarray(a, dtype=float) for a in (y1, y2, y3))
    x1, x2 = y1 - y2, y1 + y2
    res = evaluate_batch(x1, x2, y3, params)
    inside = _in_sector(x1, x2, params) & (res.region != 4)
    if not np.all(inside):
        raise RegionError("second_derivs_implicit needs points inside the implicit sector")
    M = res.value
    w = (M / y3) ** (1.0 / p)
    phi, dphi, lam = phi_suite(case, w, params)
    _, dphi_c, ddphi = phi_chain(case, w, params)
    if case is CaseId.C1_2:
        z1, z2 = x2, x1
        sgn = (1.0, -1.0)  # d/dy_i of (y1+y2, y1-y2)
    else:
        z1, z2 = x1, x2
        sgn = (-1.0, 1.0)  # d/dy_i of (y1-y2, y1+y2)
    G, G1, G2, G11, G12, G22 = g_partials(z1, z2, p)
    H = G
    if i == 1:
        dH = G1 + G2
        ddH = 4.0 * G12
    else:
        dH = sgn[0] * G1 + sgn[1] * G2
        ddH = np.zeros_like(G)
    R1 = 1.0 / dphi
    R2 = -ddphi / dphi ** 2
    K = w * R2 + (p - 1) * R1
    pre = p * w ** (p - 2)
    M33 = pre * R1 * H * H / y3 ** 3 * K
    M3i = -pre * R1 * H * dH / y3 ** 2 * K
    Mii = pre * R1 / y3 * (K * dH * dH + w * y3 * ddH)
    Di = p * p * w ** (2 * p - 3) * R1 * R1 * H * H * ddH / y3 ** 3 * K
    return dict(M33=M33, M3i=M3i, Mii=Mii, D_i=Di, Phi=phi, dPhi=dphi, ddPhi=ddphi,
                R1=R1, R2=R2, Lambda=lam, H=H, dH=dH, ddH=ddH, omega=w,
                beta=_beta_of(w, tau), M=M)


def second_derivs_implicit(y, params, i=1):
    """Analytic second derivatives of ``M`` at a point of the implicit sector."""
    y = _as_y(y)
    d = second_derivs_batch(y.y1, y.y2, y.y3, params, i=i)
    keys = [f.name for f in SecondDerivs.__dataclass_fields__.values() if f.name != "i"]
    return SecondDerivs(**{k: float(np.ravel(d[k])[0]) for k in keys}, i=i)


def fd_second_derivs(y1, y2, y3, params, i=1, h=1e-4):
    """Central differences of ``M(y) = B(y1 - y2, y1 + y2, y3)`` in long double.

    Returns ``(M33, M3i, Mii, D_i, scale)`` with ``scale`` the squared sum of
    the three magnitudes (the size of the terms cancelling in ``D_i``).
    """
    y1, y2, y3 = (np.asarray(a, dtype=LD) for a in (y1, y2, y3))
    hl = LD(h)

    def M(d_i, d_3):
        # stencil arithmetic stays in long double
        a1 = y1 + (d_i * hl if i == 1 else 0)
        a2 = y2 + (d_i * hl if i == 2 else 0)
        return evaluate_batch(a1 - a2, a1 + a2, y3 + d_3 * hl, params, longdouble=True).value

    m0 = M(0, 0)
    m33 = (M(0, 1) - 2 * m0 + M(0, -1)) / (hl * hl)
    mii = (M(1, 0) - 2 * m0 + M(-1, 0)) / (hl * hl)
    m3i = (M(1, 1) - M(1, -1) - M(-1, 1) + M(-1, -1)) / (4 * hl * hl)
    d = m33 * mii - m3i * m3i
    scale = (np.abs(m33) + np.abs(m3i) + np.abs(mii)) ** 2
    return (m33.astype(float), m3i.astype(float), mii.astype(float), d.astype(float),
            scale.astype(float))


# ---------------------------------------------------------------------------
# sampling


def halton(n, dims, skip=20, offset=None):
    """Halton points in ``[0, 1)**dims`` with an optional Cranley-Patterson shift."""
    primes = [2, 3, 5, 7, 11, 13][:dims]
    idx = np.arange(skip + 1, skip + n + 1)
    out = np.empty((n, dims))
    for d, b in enumerate(primes):
        f = np.ones(n)
        r = np.zeros(n)
        k = idx.copy()
        while np.any(k > 0):
            f = f / b
            r = r + f * (k % b)
            k = k // b
        out[:, d] = r
    if offset is not None:
        out = (out + np.asarray(offset)) % 1.0
    return out


def sample_sector(params, n, margin=1e-3, theta_range=(1e-7, 1e3), seed=0):
    """Stratified canonical points of the implicit sector.

    Parameterized by ``rho = y2/y1`` and ``theta = y3/(y1 - y2)**p - 1`` (log
    uniform), then rescaled so ``max(|x1|, |x2|, x3**(1/p)) == 1``.
    Returns ``(y1, y2, y3)``.
    """
    p = params.p
    rng = np.random.default_rng(seed)
    u = halton(n, 2, offset=rng.random(2))
    if params.above_two:
        lo, hi = (p - 2) / p + margin, 1.0 - margin
    else:
        lo, hi = -1.0 + margin, (2 - p) / p - margin
    rho = lo + (hi - lo) * u[:, 0]
    lt0, lt1 = np.log(theta_range[0]), np.log(theta_range[1])
    theta = np.exp(lt0 + (lt1 - lt0) * u[:, 1])
    y1 = np.ones(n)
    y2 = rho
    y3 = (1.0 + theta) * (y1 - y2) ** p
    x1, x2 = y1 - y2, y1 + y2
    r = np.maximum(np.maximum(np.abs(x1), np.abs(x2)), y3 ** (1.0 / p))
    return y1 / r, y2 / r, y3 / r ** p


# ---------------------------------------------------------------------------
# audits


def sector_sign_audit(params, n_samples=100_000, seed=0):
    """Signs in the implicit sector: ``M11, M22, M33 < 0`` and ``D1 > 0``.

    Returns one report per claim keyed by name.
    """
    case = sector_case(params)
    y1, y2, y3 = sample_sector(params, n_samples, seed=seed)
    d1 = second_derivs_batch(y1, y2, y3, params, i=1)
    d2 = second_derivs_batch(y1, y2, y3, params, i=2)
    wit = (y1 - y2, y1 + y2, y3)
    tag = case.value
    return {
        "M11<0": make_report(f"{tag}:M11<0", params, d1["Mii"], wit),
        "M22<0": make_report(f"{tag}:M22<0", params, d2["Mii"], wit),
        "M33<0": make_report(f"{tag}:M33<0", params, d1["M33"], wit),
        "D1>0": make_report(f"{tag}:D1>0", params, -d1["D_i"], wit),
    }


def _stencil_safe_sample(params, n, h, seed):
    # keep every stencil node strictly inside the sector and the domain
    p = params.p
    k = (p - 2) / p if params.above_two else (2 - p) / p
    pad = 20 * h
    y1, y2, y3 = sample_sector(params, 4 * n, margin=2e-2, theta_range=(2e-2, 50.0), seed=seed)
    x1 = y1 - y2
    ok = (y3 - pad >= (x1 + pad) ** p * (1 + 1e-2)) & (np.abs(y2 - k * y1) > pad)
    # the characteristic fan degenerates as x3 -> 0; h is fixed, so stay at x3 >= 0.2**p
    ok &= y3 >= 0.2 ** p
    ok &= (y1 + y2 > pad) & (x1 > pad)
    idx = np.flatnonzero(ok)[:n]
    return y1[idx], y2[idx], y3[idx]


def fd_agreement_audit(params, n_samples=1000, h=1e-4, seed=1, rtol=1e-3, atol=1e-8):
    """Analytic versus finite-difference second derivatives and ``D2`` degeneracy."""
    case = sector_case(params)
    y1, y2, y3 = _stencil_safe_sample(params, n_samples, h, seed)
    wit = (y1 - y2, y1 + y2, y3)
    reports = {}
    worst = []
    for i in (1, 2):
        an = second_derivs_batch(y1, y2, y3, params, i=i)
        m33, m3i, mii, d, scale = fd_second_derivs(y1, y2, y3, params, i=i, h=h)
        for name, a, f in (("M33", an["M33"], m33), (f"M3{i}", an["M3i"], m3i),
                           (f"M{i}{i}", an["Mii"], mii)):
            if name in reports:
                continue
            tol = np.maximum(rtol * np.abs(a), atol)
            reports[name] = make_report(f"{case.value}:{name} fd", params, np.abs(a - f) - tol, wit)
        if i == 2:
            reports["D2 fd"] = make_report(f"{case.value}:D2 fd", params,
                                           np.abs(d) - 1e-4 * scale, wit)
    return reports


def explicit_concavity_audit(params, n_samples=100_000):
    """Concavity claims for the explicit branch.

    ``p >= 2``: ``F(s) <= 1e-12`` on ``s`` in ``(0, p-1]``.
    ``p < 2``: ``g <= 0`` on the rays ``y2 = c y1``, ``c`` in ``[(2-p)/p, 1]``;
    ``g(y1, y1) < 0``; ``g(y1, -y1) > 0`` for ``0 < |tau| <= 1/2`` (at
    ``tau = 0`` both terms of ``g`` vanish there and only ``g = 0`` is checked).
    """
    p, tau = params.p, params.tau
    t2 = tau * tau
    C = params.c_sharp
    if p >= 2:
        s = np.linspace(0.0, p - 1.0, n_samples + 1)[1:]
        F = (p - 2) * (s + t2) ** 2 + (1 + t2) * (s * s + t2) - C * (p - 1) * (s * s + t2) ** ((4 - p) / 2)
        return make_report("explicit:F(s)<=0", params, F - 1e-12, (s,))
    k = (2 - p) / p
    c = np.linspace(k, 1.0, n_samples)
    viol = np.concatenate([explicit_g(1.0, c, params),
                           [explicit_g(1.0, 1.0, params)]])
    g_minus = explicit_g(1.0, -1.0, params)
    if tau != 0.0:
        viol = np.concatenate([viol, [-g_minus]])
    else:
        viol = np.concatenate([viol, [abs(g_minus) - 1e-12]])
    cs = np.concatenate([c, [1.0, -1.0]])
    return make_report("explicit:g-signs", params, viol, (cs,), {"g(1,-1)": float(g_minus)})


def explicit_g(y1, y2, params):
    """Sign function ``g`` whose sign equals that of ``M_{y2y2}`` in the explicit branch (``p < 2``)."""
    p, tau = params.p, params.tau
    gam = params.gamma
    y1 = np.asarray(y1, dtype=float)
    y2 = np.asarray(y2, dtype=float)
    f1 = y1 * y1 + y2 * y2 + 2 * gam * y1 * y2
    f2 = (p - 2) * (y2 + gam * y1) ** 2 + f1
    f3 = y1 - y2
    cst = (1.0 / (p - 1) ** 2 + tau * tau) ** (p / 2)
    return (1 + tau * tau) ** (p / 2) * f3 ** (2 - p) * f2 - (p - 1) * cst * f1 ** ((4 - p) / 2)


def rejected_case_audit(case, params, n_samples=100_000, seed=0):
    """``D2 < 0`` for the rejected cases, via ``sign D2 = sign H'' * sign Lambda``.

    ``beta`` is sampled over the admissible range (``beta > 1`` for C1_1,
    ``0 < beta < 1`` for C3_1) with a 1e-6 margin; ``H''`` is evaluated at
    random points of the case's half-plane.
    """
    case = CaseId(case)
    if case not in (CaseId.C1_1, CaseId.C3_1):
        raise ValueError("rejected-case audits cover C1_1 and C3_1 only")
    if params.is_p2:
        return make_report(case, params, np.zeros(0), (), {"skipped": "p = 2"})
    p, tau = params.p, params.tau
    rng = np.random.default_rng(seed)
    u = halton(n_samples, 3, offset=rng.random(3))
    if case is CaseId.C1_1:
        beta = 1.0 + 1e-6 + np.exp(np.log(1e-6) + (np.log(1e3) - np.log(1e-6)) * u[:, 0])
    else:
        beta = 1e-6 + (1.0 - 2e-6) * u[:, 0]
    omega = np.sqrt(beta * beta + tau * tau)
    _, _, lam = phi_suite(case, omega, params)
    # points with y2 < 0 < y1, |y2| < y1 (C1_1: H = G(y2+y1, y2-y1), y2 > 0 branch
    # mirrored) parameterized by the ratio
    y1 = np.ones(n_samples)
    if case is CaseId.C1_1:
        y2 = 1e-6 + (1 - 2e-6) * u[:, 1]
        z1, z2 = y2 + y1, y2 - y1
    else:
        y2 = -(1e-6 + (1 - 2e-6) * u[:, 1])
        z1, z2 = y1 - y2, -y1 - y2
    ddH = 4.0 * g_partials(z1, z2, p)[4]
    prod = np.sign(ddH) * np.sign(lam)
    return make_report(case, params, prod, (beta, y1, y2),
                       {"sign_ddH": float(np.sign(np.median(ddH))),
                        "sign_Lambda": float(np.sign(np.median(lam)))})


def lambda_consistency(case, omega, params):
    """Relative gap between closed-form ``Lambda`` and ``(p-1)Phi' - omega Phi''`` from the chain rule."""
    _, _, lam = phi_suite(case, omega, params)
    _, dphi, ddphi = phi_chain(case, omega, params)
    alt = (params.p - 1) * dphi - omega * ddphi
    return np.abs(lam - alt) / np.maximum(np.abs(lam), np.finfo(float).tiny)


def q_beta_audit(params, n_samples=100_000):
    beta = params.p - 1 + np.geomspace(1e-6, 1e3, n_samples)
    return make_report("q(beta)>0", params, -q_beta(beta, params), (beta,))


def random_splits(params, n, seed=0):
    """Admissible splits ``x = a x+ + (1-a) x-`` with ``|dx1| = |dx2|`` and ``x+-`` in the domain.

    Endpoint scales are log-uniform so that both wide and very local splits
    (down to ``1e-6``) occur.  Returns ``(a, xp, xm, x)`` with ``xp``, ``xm``,
    ``x`` of shape ``(3, n)``.
    """
    p = params.p
    rng = np.random.default_rng(seed)
    a = rng.uniform(0.05, 0.95, n)
    x1m = rng.normal(0.0, 1.0, n)
    x2m = rng.normal(0.0, 1.5, n)
    d = np.exp(rng.uniform(np.log(1e-6), np.log(2.0), n)) * rng.choice([-1.0, 1.0], n)
    x1p = x1m + d
    x2p = x2m + d * rng.choice([-1.0, 1.0], n)
    # slack above |x1|**p: log-uniform, with a share pinned to the boundary
    def lift(x1):
        z = np.exp(rng.uniform(np.log(1e-8), np.log(4.0), n))
        z[rng.random(n) < 0.1] = 0.0
        return np.abs(x1) ** p * (1.0 + 1e-12) + z
    xp = np.stack([x1p, x2p, lift(x1p)])
    xm = np.stack([x1m, x2m, lift(x1m)])
    x = a * xp + (1 - a) * xm
    return a, xp, xm, x


def restrictive_concavity_fuzz(params, n_samples=100_000, seed=0, tol=1e-9):
    """``B(x) >= a B(x+) + (1-a) B(x-) - tol (1 + B(x))`` on random admissible splits."""
    a, xp, xm, x = random_splits(params, n_samples, seed)
    bp = evaluate_batch(*xp, params, longdouble=True).value
    bm = evaluate_batch(*xm, params, longdouble=True).value
    b0 = evaluate_batch(*x, params, longdouble=True).value
    gap = (LD(1) - a) * bm + a.astype(LD) * bp - b0
    score = (gap / (1 + b0)).astype(float) - tol
    return make_report("restrictive-concavity", params, score, (*x, *(xp - xm)))


def glue_audit(params, n_samples=10_000, offset=1e-7, tol=1e-10, c1_tol=1e-5):
    """Values on the gluing line ``|x2| = (p*-1)|x1|`` and C1 matching across it.

    On the line the explicit and implicit routes must both give
    ``c_sharp * x3`` (relative ``tol``); at ``x2 = (p*-1) x1 +- offset`` the
    two one-sided values must agree to ``c1_tol * B``.
    """
    if params.is_p2:
        return make_report("glue", params, np.zeros(0), (), {"skipped": "p = 2"})
    P = params.p_star_minus_1
    x3 = 1.0 + np.geomspace(1e-6, 1e3, n_samples)
    x1 = np.ones(n_samples)
    x2 = P * x1
    target = params.c_sharp * x3
    ex = evaluate_batch(x1, x2, x3, params, route="explicit").value
    im = evaluate_batch(x1, x2, x3, params, route="implicit").value
    line = np.maximum(np.abs(ex - target), np.abs(im - target)) / target - tol
    lo = evaluate_batch(x1, x2 - offset, x3, params).value
    hi = evaluate_batch(x1, x2 + offset, x3, params).value
    # first-order difference across the line, minus the smooth slope contribution
    jump = np.abs(hi - lo) / target
    slope = 2 * offset * params.p * P ** (params.p - 1) * (P * P + params.tau ** 2) ** (params.p / 2 - 1)
    side = jump - (c1_tol + slope)
    mismatch = float(np.max(np.maximum(np.abs(ex - target), np.abs(im - target)) / target))
    return make_report("glue", params, np.concatenate([line, side]),
                       (np.concatenate([x3, x3]),), {"max_mismatch": mismatch})
