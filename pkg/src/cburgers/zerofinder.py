"""Zeros of a caloric field v(x, t) in space-time.

Cells are flagged by the winding number of v along their boundary, computed
from argument increments with adaptive densification. Flagged cells are
refined by Newton's method on (Re v, Im v) using v_t = v_xx. Nodal curves of
Re v or Im v are followed by predictor-corrector continuation.

The scan assumes v has no zeros near t = 0 below the rectangle; that
hypothesis cannot be checked numerically and is recorded in reports.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.optimize import brentq, minimize

ARG_STEP = 0.5 * math.pi
NEAR_ZERO = 1e-12
_SHIFTS = (0.1, -0.17, 0.23, -0.29, 0.31, -0.37, 0.41, -0.13)
ASSUMPTION = "no zeros of v in a neighbourhood of t = 0 below the scanned rectangle (not verified)"


class DegenerateZeroError(RuntimeError):
    """A zero sits on a cell boundary or refinement failed to isolate it."""


class BranchAmbiguity(RuntimeError):
    """Tangent matching could not pick a unique continuation at a singular point."""


class _OnBoundary(Exception):
    pass


@dataclass(frozen=True)
class Cell:
    x_lo: float
    x_hi: float
    t_lo: float
    t_hi: float
    winding: int = 0

    @property
    def center(self):
        return 0.5 * (self.x_lo + self.x_hi), 0.5 * (self.t_lo + self.t_hi)

    @property
    def size(self):
        return max(self.x_hi - self.x_lo, self.t_hi - self.t_lo)

    def contains(self, x, t, margin=0.0):
        return (self.x_lo - margin <= x <= self.x_hi + margin
                and self.t_lo - margin <= t <= self.t_hi + margin)

    def quadrants(self):
        xm, tm = self.center
        return [Cell(self.x_lo, xm, self.t_lo, tm), Cell(xm, self.x_hi, self.t_lo, tm),
                Cell(self.x_lo, xm, tm, self.t_hi), Cell(xm, self.x_hi, tm, self.t_hi)]


@dataclass(frozen=True)
class ZeroRecord:
    x0: float
    t0: float
    winding: int
    a_lin: complex
    b_lin: complex
    simple: bool

    def csv_row(self):
        return [self.x0, self.t0, self.winding, self.a_lin.real, self.a_lin.imag,
                self.b_lin.real, self.b_lin.imag, self.simple]


CSV_COLUMNS = ("x0", "t0", "winding", "re_a", "im_a", "re_b", "im_b", "simple")


@dataclass
class NodalCurve:
    samples: list
    which: str
    singular_points: list = dc_field(default_factory=list)
    truncated: str = ""

    def as_array(self):
        return np.asarray(self.samples, dtype=float).reshape(-1, 2)


def _v(fld, x, t):
    return np.asarray(fld.eval(x, t)[0], dtype=complex)


# -- winding numbers ---------------------------------------------------
def _increments(fld, p0, p1, v0, v1, max_depth=50):
    """Total change of arg v along each segment p0[k] -> p1[k]."""
    inc = np.angle(v1 / v0)
    total = np.where(np.abs(inc) < ARG_STEP, inc, 0.0)
    idx = np.nonzero(np.abs(inc) >= ARG_STEP)[0]
    a, b, va, vb = p0[idx], p1[idx], v0[idx], v1[idx]
    depth = 0
    while idx.size:
        depth += 1
        if depth > max_depth:
            raise _OnBoundary()
        m = 0.5 * (a + b)
        vm = _v(fld, m[:, 0], m[:, 1])
        if np.any(np.abs(vm) < NEAR_ZERO):
            raise _OnBoundary()
        idx = np.concatenate([idx, idx])
        a, b = np.concatenate([a, m]), np.concatenate([m, b])
        va, vb = np.concatenate([va, vm]), np.concatenate([vm, vb])
        inc = np.angle(vb / va)
        ok = np.abs(inc) < ARG_STEP
        np.add.at(total, idx[ok], inc[ok])
        idx, a, b, va, vb = idx[~ok], a[~ok], b[~ok], va[~ok], vb[~ok]
    return total


def _grid_windings(fld, xs, ts):
    X, T = np.meshgrid(xs, ts)
    V = _v(fld, X, T)
    if np.any(np.abs(V) < NEAR_ZERO) or not np.all(np.isfinite(V)):
        raise _OnBoundary()
    P = np.stack([X, T], axis=-1)
    H = _increments(fld, P[:, :-1].reshape(-1, 2), P[:, 1:].reshape(-1, 2),
                    V[:, :-1].ravel(), V[:, 1:].ravel()).reshape(len(ts), len(xs) - 1)
    Vt = _increments(fld, P[:-1, :].reshape(-1, 2), P[1:, :].reshape(-1, 2),
                     V[:-1, :].ravel(), V[1:, :].ravel()).reshape(len(ts) - 1, len(xs))
    W = (H[:-1, :] + Vt[:, 1:] - H[1:, :] - Vt[:, :-1]) / (2 * math.pi)
    Wi = np.rint(W)
    if np.max(np.abs(W - Wi), initial=0.0) > 1e-6:
        raise _OnBoundary()
    return Wi.astype(int)


def rect_winding(fld, rect, n=16):
    """Winding number of v along the boundary of rect = (x_lo, x_hi, t_lo, t_hi)."""
    xl, xh, tl, th = rect
    s = np.linspace(0.0, 1.0, n + 1)[:-1]
    pts = np.concatenate([
        np.column_stack([xl + (xh - xl) * s, np.full(n, tl)]),
        np.column_stack([np.full(n, xh), tl + (th - tl) * s]),
        np.column_stack([xh - (xh - xl) * s, np.full(n, th)]),
        np.column_stack([np.full(n, xl), th - (th - tl) * s]),
    ])
    vals = _v(fld, pts[:, 0], pts[:, 1])
    if np.any(np.abs(vals) < NEAR_ZERO):
        raise DegenerateZeroError(f"v vanishes on the boundary of {rect}")
    try:
        inc = _increments(fld, pts, np.roll(pts, -1, axis=0), vals, np.roll(vals, -1))
    except _OnBoundary:
        raise DegenerateZeroError(f"v vanishes on the boundary of {rect}") from None
    w = inc.sum() / (2 * math.pi)
    return int(round(w))


def scan(fld, rect, cell=0.05, subdiv=2, max_shift=len(_SHIFTS)):
    """Cells of side <= cell / 2**subdiv inside rect with nonzero winding, sorted by (t, x).

    Every user cell is subdivided ``subdiv`` times before windings are taken,
    which lowers the chance that two zeros of opposite index share a cell.
    Grid lines that pass through a zero are nudged (interior lines only).
    """
    xl, xh, tl, th = map(float, rect)
    if not (tl > 0 and th > tl and xh > xl):
        raise ValueError(f"bad rectangle {rect}: need x_lo < x_hi and 0 < t_lo < t_hi")
    if not cell > 0:
        raise ValueError("cell must be positive")
    nx = max(1, math.ceil((xh - xl) / cell - 1e-9)) * 2 ** subdiv
    nt = max(1, math.ceil((th - tl) / cell - 1e-9)) * 2 ** subdiv
    xs0 = np.linspace(xl, xh, nx + 1)
    ts0 = np.linspace(tl, th, nt + 1)
    hx, ht = (xh - xl) / nx, (th - tl) / nt
    xs, ts = xs0, ts0
    for attempt in range(max_shift + 1):
        try:
            W = _grid_windings(fld, xs, ts)
            break
        except _OnBoundary:
            if attempt == max_shift:
                raise DegenerateZeroError(
                    f"zero on the scan grid of {rect} persists after {max_shift} shifts") from None
            f = _SHIFTS[attempt]
            xs = xs0.copy()
            ts = ts0.copy()
            xs[1:-1] += f * hx
            ts[1:-1] += f * ht
    jj, ii = np.nonzero(W)
    cells = [Cell(float(xs[i]), float(xs[i + 1]), float(ts[j]), float(ts[j + 1]), int(W[j, i]))
             for j, i in zip(jj, ii)]
    cells.sort(key=lambda c: (c.t_lo, c.x_lo))
    return cells


def zero_count(cells):
    return sum(abs(c.winding) for c in cells)


# -- refinement --------------------------------------------------------
def _newton(fld, x, t, tol, max_iter, box=None):
    for _ in range(max_iter):
        v, vx, vxx = (complex(q) for q in fld.eval(x, t))
        if abs(v) < tol:
            return x, t, True
        J = np.array([[vx.real, vxx.real], [vx.imag, vxx.imag]])
        try:
            dx, dt = np.linalg.solve(J, [-v.real, -v.imag])
        except np.linalg.LinAlgError:
            return x, t, False
        if box is not None:
            lim = 0.5 * box.size
            n = math.hypot(dx, dt)
            if n > lim:
                dx, dt = dx * lim / n, dt * lim / n
        x, t = x + dx, t + dt
        if not (t > 0 and math.isfinite(x)):
            return x, t, False
        if box is not None and not box.contains(x, t, margin=box.size):
            return x, t, False
    v = complex(fld.eval(x, t)[0])
    return x, t, abs(v) < tol


def _bisect_cell(fld, cell, min_size=1e-11):
    """Shrink a cell of nonzero winding by repeated quadrant tests."""
    w = cell.winding
    while cell.size > min_size:
        for q in cell.quadrants():
            try:
                wq = rect_winding(fld, (q.x_lo, q.x_hi, q.t_lo, q.t_hi))
            except DegenerateZeroError:
                # the zero sits on an internal line; return the point itself
                return cell
            if wq != 0:
                cell = Cell(q.x_lo, q.x_hi, q.t_lo, q.t_hi, wq)
                break
        else:
            raise DegenerateZeroError(f"winding {w} lost while subdividing {cell}")
    return cell


def refine(fld, cell, tol=1e-12, max_iter=50):
    """Newton refinement of the zero inside ``cell``; bisection fallback."""
    x, t = cell.center
    x, t, ok = _newton(fld, x, t, tol, max_iter, box=cell)
    if not (ok and cell.contains(x, t, margin=1e-9 * max(1.0, cell.size))):
        small = _bisect_cell(fld, cell)
        x, t = small.center
        x, t, ok = _newton(fld, x, t, tol, max_iter, box=small)
        if not ok:
            v = complex(fld.eval(x, t)[0])
            if abs(v) > 1e3 * tol:
                raise DegenerateZeroError(f"no convergence in {cell}: |v| = {abs(v):.3g}")
    _, a, b = (complex(q) for q in fld.eval(x, t))
    cross = (a.conjugate() * b).imag
    simple = abs(cross) > 1e-8 * abs(a) * abs(b) and abs(a) * abs(b) > 0
    winding = cell.winding if cell.winding else (int(np.sign(cross)) if simple else 0)
    return ZeroRecord(float(x), float(t), int(winding), a, b, bool(simple and abs(winding) == 1))


def _split_multi(fld, cell, depth=12):
    if abs(cell.winding) <= 1 or depth == 0:
        return [cell]
    out = []
    for q in cell.quadrants():
        w = rect_winding(fld, (q.x_lo, q.x_hi, q.t_lo, q.t_hi))
        if w:
            out.extend(_split_multi(fld, Cell(q.x_lo, q.x_hi, q.t_lo, q.t_hi, w), depth - 1))
    return out


def refine_all(fld, cells, tol=1e-12, dedupe=1e-8):
    zeros = []
    for c in cells:
        for sub in _split_multi(fld, c):
            z = refine(fld, sub, tol=tol)
            if not any(math.hypot(z.x0 - o.x0, z.t0 - o.t0) < dedupe for o in zeros):
                zeros.append(z)
    zeros.sort(key=lambda z: (z.t0, z.x0))
    return zeros


def find_zeros(fld, rect, cell=0.05, subdiv=2, tol=1e-12):
    return refine_all(fld, scan(fld, rect, cell, subdiv), tol=tol)


def default_rect(L, t_max, t_min=1e-3):
    return (-4.0 * L, 4.0 * L, t_min, t_max)


def first_blowup_time(fld, x_window, t_max, t_min=1e-3, cell=0.05, tol=1e-6, subdiv=2):
    """Earliest t of a zero of v in x_window x [t_min, t_max], or None.

    The scan brackets the earliest zero; the time is then bisected on the
    predicate "v has nonzero winding on [x-box] x [t_lo, t]" to tolerance tol.
    """
    if not t_max > 0:
        raise ValueError("t_max must be positive")
    xl, xh = x_window
    if t_min >= t_max:
        return None
    zeros = find_zeros(fld, (xl, xh, t_min, t_max), cell=cell, subdiv=subdiv)
    if not zeros:
        return None
    z = zeros[0]
    h = cell / 2 ** subdiv
    box_x = (max(xl, z.x0 - h), min(xh, z.x0 + h))
    lo = max(t_min, z.t0 - h)
    hi = min(t_max, z.t0 + h)

    def has_zero(t):
        try:
            return rect_winding(fld, (box_x[0], box_x[1], lo, t)) != 0
        except DegenerateZeroError:
            return True

    a, b = lo, hi
    if not has_zero(b):
        return z.t0
    while b - a > tol:
        m = 0.5 * (a + b)
        if has_zero(m):
            b = m
        else:
            a = m
    return 0.5 * (a + b)


# -- nodal curves ------------------------------------------------------
def _component(which):
    if which in ("Re", "re", "real"):
        return np.real
    if which in ("Im", "im", "imag"):
        return np.imag
    raise ValueError(f"which must be 'Re' or 'Im', got {which!r}")


class _Nodal:
    def __init__(self, fld, which):
        self.fld = fld
        self.comp = _component(which)

    def __call__(self, p):
        v, vx, vxx = self.fld.eval(p[0], p[1])
        return float(self.comp(v)), np.array([float(self.comp(vx)), float(self.comp(vxx))])

    def correct(self, q, tol=1e-12, max_iter=30):
        for _ in range(max_iter):
            g, grad = self(q)
            if abs(g) < tol:
                return q, True
            n2 = grad @ grad
            if n2 == 0:
                return q, False
            q = q - g * grad / n2
        g, _ = self(q)
        return q, abs(g) < tol


def _inside(p, rect):
    return rect[0] <= p[0] <= rect[1] and rect[2] <= p[1] <= rect[3]


def _ang_dist(a, b):
    return abs((a - b + math.pi) % (2 * math.pi) - math.pi)


def _locate_singular(nod, p0, scale):
    def obj(z):
        g, grad = nod(z)
        return (grad @ grad + g * g) / scale ** 2

    res = minimize(obj, p0, method="Nelder-Mead",
                   options={"xatol": 1e-13, "fatol": 1e-30, "maxiter": 4000})
    return np.asarray(res.x, dtype=float)


def _pass_singular(nod, p_star, p_last, radius, n=720):
    """Crossing point on the circle |p - p*| = radius that continues the incoming branch.

    Near a singular point the nodal set looks like the caloric model
    x = b y + y^2 f(y), t = -y^2: branches with b != 0 leave with horizontal
    tangents and continue by reflection across the vertical; the b = 0
    branch is vertical and continues straight through.
    """
    th = np.linspace(-math.pi, math.pi, n, endpoint=False)
    pts = p_star[None, :] + radius * np.column_stack([np.cos(th), np.sin(th)])
    g = np.array([nod(p)[0] for p in pts])
    crossings = []
    for k in range(n):
        a0, a1 = th[k], th[k] + 2 * math.pi / n
        g0, g1 = g[k], g[(k + 1) % n]
        if g0 == 0.0:
            crossings.append(a0)
        elif g0 * g1 < 0:
            fa = lambda a: nod(p_star + radius * np.array([math.cos(a), math.sin(a)]))[0]
            crossings.append(brentq(fa, a0, a1, xtol=1e-14))
    d = p_last - p_star
    th_in = math.atan2(d[1], d[0])
    if abs(math.cos(th_in)) >= abs(math.sin(th_in)):
        target = math.pi - th_in
    else:
        target = th_in + math.pi
    cand = sorted((c for c in crossings if _ang_dist(c, th_in) > 0.2), key=lambda c: _ang_dist(c, target))
    if not cand:
        raise BranchAmbiguity(f"no outgoing branch at {tuple(p_star)}")
    if len(cand) > 1 and _ang_dist(cand[1], target) - _ang_dist(cand[0], target) < 0.05:
        raise BranchAmbiguity(f"two branches match the incoming tangent at {tuple(p_star)}")
    c = cand[0]
    return p_star + radius * np.array([math.cos(c), math.sin(c)])


def trace_nodal(fld, which, seed, step, rect, max_points=20000, sing_ratio=0.02):
    """Follow the zero set of Re v or Im v through ``seed`` in both directions."""
    if not step > 0:
        raise ValueError("step must be positive")
    nod = _Nodal(fld, which)
    seed = np.asarray(seed, dtype=float)
    g0, grad0 = nod(seed)
    if abs(g0) > 1e-9:
        raise ValueError(f"seed is not on the nodal set: |g| = {abs(g0):.3g}")
    ref = float(np.hypot(*grad0))
    if ref == 0:
        raise ValueError("seed is a singular point of the nodal set")
    tau0 = np.array([-grad0[1], grad0[0]]) / ref
    curve = NodalCurve([], which)
    halves = []
    for direction in (-1.0, 1.0):
        pts = _march(nod, seed, direction * tau0, step, rect, ref, sing_ratio, max_points, curve)
        halves.append(pts)
    back, fwd = halves
    curve.samples = [tuple(p) for p in back[::-1]] + [tuple(p) for p in fwd[1:]]
    return curve


def _march(nod, seed, tau, step, rect, ref, sing_ratio, max_points, curve):
    pts = [seed]
    hmax = 0.9 * step  # leaves room for the corrector within one step length
    h = hmax
    passed = []
    while len(pts) < max_points:
        p = pts[-1]
        q, ok = nod.correct(p + h * tau)
        if ok:
            g, grad = nod(q)
            gn = float(np.hypot(*grad))
            d = q - p
            dist = float(np.hypot(*d))
            cosang = (d @ tau) / dist if dist > 0 else -1.0
            ok = 0 < dist <= min(1.5 * h, step) and cosang > 0.85
        if not ok:
            h *= 0.5
            if h < step / 256:
                curve.truncated = f"continuation stalled near {tuple(p)}"
                break
            continue
        if gn < sing_ratio * ref:
            ps = _locate_singular(nod, q, ref)
            if not any(np.hypot(*(ps - o)) < 1e-6 for o in passed):
                if np.hypot(*(ps - p)) <= step:
                    try:
                        c = _pass_singular(nod, ps, p, step)
                    except BranchAmbiguity as exc:
                        curve.truncated = str(exc)
                        break
                    passed.append(ps)
                    curve.singular_points.append(tuple(ps))
                    if not _inside(ps, rect):
                        break
                    c, _ = nod.correct(c)
                    pts.append(ps)
                    if not _inside(c, rect):
                        break
                    pts.append(c)
                    tau = (c - ps) / np.hypot(*(c - ps))
                    h = hmax
                    continue
        if not _inside(q, rect):
            break
        pts.append(q)
        tn = np.array([-grad[1], grad[0]])
        tn = tn / np.hypot(*tn) if gn > 0 else tau
        tau = tn if tn @ tau >= 0 else -tn
        h = min(hmax, 2 * h)
    return pts
