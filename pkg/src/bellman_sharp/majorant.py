"""Two-variable majorant ``U`` and a grid oracle for its envelope.

``v(x, y) = (tau**2 x**2 + y**2)**(p/2) - C |x|**p`` is the obstacle and
``u(x, y) = alpha (|x| + |y|)**(p-1) (|y| - (p*-1)|x|)`` the glued piece.  For
``p < 2`` the majorant is ``v`` on ``|y| >= (p*-1)|x|`` and ``u`` elsewhere;
for ``p >= 2`` the pieces swap.

``zigzag_concavify`` computes the least function above an obstacle that is
concave along both diagonal families by alternating exact 1-D upper hulls.

Grid CSV schema: header ``x,y,value``; rows in row-major order (x outer,
y inner); 17 significant digits; LF line endings.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .bellman import LD, bellman_values
from .domain import ConvergenceError, GridError, Params


def eval_v(x, y, params):
    p, t2 = params.p, params.tau ** 2
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return (t2 * x * x + y * y) ** (p / 2.0) - params.c_sharp * np.abs(x) ** p


def eval_u(x, y, params):
    p = params.p
    ax = np.abs(np.asarray(x, dtype=float))
    ay = np.abs(np.asarray(y, dtype=float))
    return params.alpha_glue * (ax + ay) ** (p - 1.0) * (ay - params.p_star_minus_1 * ax)


def _u_region(x, y, params):
    """True where the ``u`` piece is active."""
    big = np.abs(y) >= params.p_star_minus_1 * np.abs(x)
    return big if params.p >= 2.0 else ~big


def eval_U(x, y, params):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = np.where(_u_region(x, y, params), eval_u(x, y, params), eval_v(x, y, params))
    return out if out.ndim else float(out)


def _piece_grads(x, y, params):
    p, t2, C, ps, al = (params.p, params.tau ** 2, params.c_sharp,
                        params.p_star_minus_1, params.alpha_glue)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    sx, sy = np.sign(x), np.sign(y)
    ax, ay = np.abs(x), np.abs(y)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = ax + ay
        lin = ay - ps * ax
        ux = al * (p - 1.0) * sx * t ** (p - 2.0) * lin - al * ps * sx * t ** (p - 1.0)
        uy = al * (p - 1.0) * sy * t ** (p - 2.0) * lin + al * sy * t ** (p - 1.0)
        q = (t2 * x * x + y * y) ** ((p - 2.0) / 2.0)
        vx = p * t2 * x * q - p * sx * C * ax ** (p - 1.0)
        vy = p * y * q
    return (ux, uy), (vx, vy)


def grad_U(x, y, params):
    """Analytic gradient ``(U_x, U_y)``; undefined at the origin."""
    (ux, uy), (vx, vy) = _piece_grads(x, y, params)
    mask = _u_region(x, y, params)
    gx = np.where(mask, ux, vx)
    gy = np.where(mask, uy, vy)
    if gx.ndim == 0:
        return float(gx), float(gy)
    return gx, gy


def sup_t_profile(x, y, params, t_max, n_t=400):
    """``(t, B(x, y, t) - B(0, 0, 1) t)`` on a log-spaced grid in ``[|x|**p, t_max]``."""
    t_min = abs(x) ** params.p
    if t_max < t_min:
        raise ValueError("t_max must be at least |x|**p")
    if t_min == 0.0:
        t_min = t_max * 1e-12 if t_max > 0 else 0.0
    if t_max == t_min:
        t = np.array([t_min])
    else:
        t = np.geomspace(t_min, t_max, n_t)
        t[0] = abs(x) ** params.p if x != 0 else t[0]
    b = bellman_values(np.full_like(t, x), np.full_like(t, y), t, params, longdouble=True)
    h = b - LD(params.c_sharp) * t.astype(LD)
    return t, h.astype(float)


def sup_t_relation(x, y, params, t_max, n_t=400):
    """Largest ``B(x, y, t) - B(0, 0, 1) t`` over the t-grid."""
    if x == 0.0 and y == 0.0:
        return 0.0
    _, h = sup_t_profile(x, y, params, t_max, n_t)
    return float(np.max(h))


@dataclass
class Grid2D:
    """Values on the square lattice ``[-L, L]**2`` with spacing ``h``.

    ``values[i, j]`` sits at ``(x_i, y_j)`` with ``x_i = -L + i h``.
    """

    L: float
    h: float
    values: np.ndarray
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        n = self.L * 2.0 / self.h
        m = int(round(n))
        if m < 2 or abs(n - m) > 1e-9 * max(1.0, n):
            raise GridError(f"2L/h must be an integer >= 2, got {n}")
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (m + 1, m + 1):
            raise GridError(f"values must have shape {(m + 1, m + 1)}, got {self.values.shape}")

    @property
    def nodes(self):
        return self.values.shape[0]

    @property
    def axis(self):
        return np.linspace(-self.L, self.L, self.nodes)

    def mesh(self):
        a = self.axis
        return np.meshgrid(a, a, indexing="ij")

    @classmethod
    def from_function(cls, fn, L, h):
        n = int(round(2.0 * L / h)) + 1
        a = np.linspace(-L, L, n)
        X, Y = np.meshgrid(a, a, indexing="ij")
        return cls(L, h, fn(X, Y))

    def to_csv(self, path_or_buf=None):
        X, Y = self.mesh()
        buf = io.StringIO()
        buf.write("x,y,value\n")
        for xv, yv, val in zip(X.ravel(), Y.ravel(), self.values.ravel()):
            buf.write(f"{xv:.17g},{yv:.17g},{val:.17g}\n")
        text = buf.getvalue()
        if path_or_buf is None:
            return text
        if hasattr(path_or_buf, "write"):
            path_or_buf.write(text)
        else:
            with open(path_or_buf, "w", newline="\n") as fh:
                fh.write(text)
        return None

    @classmethod
    def from_csv(cls, path_or_buf):
        if hasattr(path_or_buf, "read"):
            text = path_or_buf.read()
        else:
            with open(path_or_buf) as fh:
                text = fh.read()
        rows = np.loadtxt(io.StringIO(text), delimiter=",", skiprows=1, ndmin=2)
        n = int(round(np.sqrt(rows.shape[0])))
        if n * n != rows.shape[0]:
            raise GridError("CSV does not hold a square grid")
        L = float(rows[-1, 0])
        h = 2.0 * L / (n - 1)
        return cls(L, h, rows[:, 2].reshape(n, n))


@njit(cache=True)
def _hull_line(vals, out):
    # monotone-chain upper hull on unit spacing, then linear fill
    n = vals.shape[0]
    idx = np.empty(n, np.int64)
    m = 0
    for k in range(n):
        while m >= 2:
            a = idx[m - 2]
            b = idx[m - 1]
            if (vals[b] - vals[a]) * (k - a) <= (vals[k] - vals[a]) * (b - a):
                m -= 1
            else:
                break
        idx[m] = k
        m += 1
    if m == 1:
        out[idx[0]] = vals[idx[0]]
    for s in range(m - 1):
        a = idx[s]
        b = idx[s + 1]
        for k in range(a, b + 1):
            out[k] = vals[a] + (vals[b] - vals[a]) * (k - a) / (b - a)


@njit(cache=True)
def _sweep(W, anti):
    n = W.shape[0]
    buf = np.empty(n)
    out = np.empty(n)
    worst = 0.0
    for k in range(2 * n - 1):
        if anti:
            i0 = max(0, k - (n - 1))
            i1 = min(n - 1, k)
        else:
            d = k - (n - 1)
            i0 = max(0, d)
            i1 = min(n - 1, n - 1 + d)
        cnt = i1 - i0 + 1
        if cnt < 3:
            continue
        for c in range(cnt):
            i = i0 + c
            buf[c] = W[i, k - i] if anti else W[i, i - (k - (n - 1))]
        _hull_line(buf[:cnt], out[:cnt])
        for c in range(cnt):
            i = i0 + c
            if anti:
                j = k - i
            else:
                j = i - (k - (n - 1))
            upd = abs(out[c] - W[i, j])
            if upd > worst:
                worst = upd
            W[i, j] = out[c]
    return worst


def zigzag_concavify(obstacle, params=None, tol=1e-10, max_iter=100_000):
    """Least majorant concave along ``x + y = const`` and ``x - y = const``.

    Parameters
    ----------
    obstacle : Grid2D
        Values to majorize.  Frame rows and columns are kept fixed; pass
        ``params`` to pin them to the analytic ``U`` first.
    params : Params, optional
    tol : float
        Stop once a full pair of sweeps changes no node by more than ``tol``.

    Returns
    -------
    Grid2D
        ``info`` holds ``iterations`` and ``last_update``.
    """
    W = np.array(obstacle.values, dtype=float, copy=True)
    if not np.all(np.isfinite(W)):
        raise GridError("obstacle has non-finite entries")
    if params is not None:
        X, Y = obstacle.mesh()
        U = eval_U(X, Y, params)
        W[0, :], W[-1, :], W[:, 0], W[:, -1] = U[0, :], U[-1, :], U[:, 0], U[:, -1]
    it = 0
    while True:
        it += 1
        a = _sweep(W, True)
        b = _sweep(W, False)
        upd = max(a, b)
        if upd <= tol:
            break
        if it >= max_iter:
            raise ConvergenceError(f"envelope did not settle after {max_iter} sweeps")
    return Grid2D(obstacle.L, obstacle.h, W, {"iterations": it, "last_update": upd})


def envelope_study(params, L=1.0, h=1.0 / 256, tol=1e-10):
    """Envelope of ``v`` with analytic frame; returns ``(grid, max |grid - U|)``."""
    obstacle = Grid2D.from_function(lambda X, Y: eval_v(X, Y, params), L, h)
    grid = zigzag_concavify(obstacle, params, tol=tol)
    X, Y = grid.mesh()
    err = float(np.max(np.abs(grid.values - eval_U(X, Y, params))))
    grid.info["max_error"] = err
    return grid, err


def majorant_audit(params, n_samples=10_000, seed=0, t_max=1e8):
    """Pointwise checks of ``U`` on random points of ``[-2, 2]**2``.

    ``U >= v``; ``U`` and its gradient continuous across ``|y| = (p*-1)|x|``
    (relative ``1e-10``); ``U`` equals ``sup_t [B(x, y, t) - c_sharp t]`` on a
    subsample (relative ``1e-4``, the log-grid resolution in ``t``).
    """
    from .concavity import make_report

    rng = np.random.default_rng(seed)
    x = rng.uniform(-2, 2, n_samples)
    y = rng.uniform(-2, 2, n_samples)
    U = eval_U(x, y, params)
    V = eval_v(x, y, params)
    scale = 1.0 + np.abs(x) ** params.p + np.abs(y) ** params.p
    above = (V - U) / scale - 1e-12

    P = params.p_star_minus_1
    gx = rng.uniform(0.1, 2, n_samples) * rng.choice([-1.0, 1.0], n_samples)
    gy = P * np.abs(gx) * rng.choice([-1.0, 1.0], n_samples)
    sc = 1.0 + np.abs(gx) ** params.p
    vu = np.abs(eval_u(gx, gy, params) - eval_v(gx, gy, params)) / sc
    (ux, uy), (wx, wy) = _piece_grads(gx, gy, params)
    dg = np.hypot(ux - wx, uy - wy) / (1.0 + np.hypot(wx, wy))
    glue = np.maximum(vu, dg) - 1e-10

    m = min(50, n_samples)
    st = np.array([sup_t_relation(float(a), float(b), params, t_max) for a, b in zip(x[:m], y[:m])])
    sup_gap = np.abs(st - U[:m]) / scale[:m] - 1e-4
    viol = np.concatenate([above, glue, sup_gap])
    wx_ = np.concatenate([x, gx, x[:m]])
    wy_ = np.concatenate([y, gy, y[:m]])
    return make_report("majorant", params, viol, (wx_, wy_),
                       {"max_glue_gap": float(np.max(glue + 1e-10)),
                        "max_sup_gap": float(np.max(sup_gap + 1e-4))})
