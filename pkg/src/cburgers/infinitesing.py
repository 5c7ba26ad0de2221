"""K-stage truncation of initial data v0 = w + i z whose heat flow vanishes at (0, tau_k).

z = sum_k (-1)^(k+1) z_k(x - x_k) is a sum of plateau bumps of height eps_k
and half-width R_k placed alternately right and left of the origin. The times
t_k and offsets d_k are chosen so that (-1)^j int exp(-y^2/4t_j) z(y) dy < 0
for every j, which forces v(0, t) = i (4 pi t)^(-1/2) int exp(-y^2/4t) z dy
to change sign between consecutive t_j. w is a real odd smoothed step, so
Re v(0, t) = 0 for all t.

Ordering: R_{k+2} is fixed (from the growth condition on R) before d_{k+1},
because the tail bound for stage k+1 needs it.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import erf, erfc

from .colehopf import Segment, StepDecomposition
from .heatfield import HeatField
from .quadrature import integrate
from .scenario import bump_cdf, bump_mass


class ConstructionError(RuntimeError):
    pass


@dataclass(frozen=True)
class StageSequences:
    K: int
    eps: tuple  # Fractions
    R: tuple  # ints, length K + 1 (R_{K+1} fixes the last tail)
    x: tuple  # ints
    t: tuple  # floats
    d: tuple  # ints

    def to_json(self):
        return {
            "w": "odd smoothed step w(x) = 1 - 2 C(x), C the normalised mollifier antiderivative on [-1, 1]",
            "stages": [
                {"eps": float(self.eps[k]), "R": self.R[k], "x": self.x[k], "t": self.t[k], "d": self.d[k]}
                for k in range(self.K)
            ],
            "R_next": self.R[self.K],
        }


def base_w(x):
    """Odd smooth step: 1 for x <= -1, -1 for x >= 1, positive on x < 0."""
    return 1.0 - 2.0 * bump_cdf(x)


def plateau(y, R, eps):
    """eps on [-R, R], 0 outside [-R-1, R+1], mollifier-CDF shoulders of width 1."""
    y = np.asarray(y, dtype=float)
    return eps * bump_cdf(2.0 * (R - np.abs(y)) + 1.0)


def plateau_slope_max(eps):
    """sup |z_k'| = 2 eps max(mollifier)/mass."""
    return 2.0 * float(eps) * math.exp(-1.0) / bump_mass()


def default_eps(K):
    return tuple(Fraction(1, 2 ** k) for k in range(1, K + 2))


def minimal_R(eps, R1=1):
    """R_1 = R1 and R_{k+1} the least integer > R_k with R_{k+1} eps_{k+1} > sum_j<=k eps_j (R_j + 1)."""
    R = [int(R1)]
    for k in range(1, len(eps)):
        S = sum(eps[j] * (R[j] + 1) for j in range(k))
        r = max(R[-1] + 1, math.floor(S / eps[k]) + 1)
        R.append(int(r))
    return tuple(R)


def check_a2(eps, R):
    """Index k (1-based) of the first violation of the growth condition, or None."""
    for k in range(1, len(R)):
        S = sum(Fraction(eps[j]) * (R[j] + 1) for j in range(k))
        if not (R[k] > R[k - 1] and R[k] * Fraction(eps[k]) > S):
            return k + 1
    return None


def check_separation(x, R):
    """First j (1-based) where |x_j| > |x_{j-1}| + R_j + R_{j-1} + 2 fails, or None."""
    for j in range(1, len(x)):
        if not abs(x[j]) > abs(x[j - 1]) + R[j] + R[j - 1] + 2:
            return j + 1
    return None


def gauss_window(lo, hi, t):
    """int_lo^hi exp(-y^2/4t) dy."""
    s = 2.0 * math.sqrt(t)
    return math.sqrt(math.pi * t) * float(erf(hi / s) - erf(lo / s))


def gauss_tail(D, t):
    """int_{|y| >= D} exp(-y^2/4t) dy."""
    if D <= 0:
        return 2.0 * math.sqrt(math.pi * t)
    return 2.0 * math.sqrt(math.pi * t) * float(erfc(D / (2.0 * math.sqrt(t))))


def stage_bound(eps, R, k, xk1, t, D=None):
    """Upper bound on (-1)^(k+1) int exp(-y^2/4t) z dy for stage k+1 (0-based k = number done).

    2 sum_{j<=k} eps_j (R_j + 1) - eps_{k+1} int_plateau exp(-y^2/4t) + tail(D).
    """
    prev = 2.0 * sum(float(eps[j]) * (R[j] + 1) for j in range(k))
    main = float(eps[k]) * gauss_window(abs(xk1) - R[k], abs(xk1) + R[k], t)
    tail = gauss_tail(D, t) if D is not None else 0.0
    return prev - main + tail


def construct(K, base_w=base_w, eps=None, R=None, t_cap=1e14, d_cap=10 ** 13):
    """(StageSequences, z, v0) for a K-stage truncation; raises ConstructionError on failure.

    base_w must be smooth, real, odd, with w(-inf) = 1 and w > 0 on x < 0.
    """
    if K < 2:
        raise ValueError("K must be at least 2")
    eps = tuple(Fraction(e) for e in (eps if eps is not None else default_eps(K)))
    if len(eps) < K + 1:
        raise ValueError("eps needs K + 1 entries")
    if not all(0 < e < 1 for e in eps):
        raise ConstructionError("(a1) needs every eps_k in (0, 1)")
    R = tuple(int(r) for r in (R if R is not None else minimal_R(eps)))
    if len(R) < K + 1:
        raise ValueError("R needs K + 1 entries")
    bad = check_a2(eps, R[:K + 1])
    if bad is not None:
        k = bad
        S = sum(eps[j] * (R[j] + 1) for j in range(k - 1))
        raise ConstructionError(
            f"(a2) violated at k = {k}: R_k eps_k = {float(R[k - 1] * eps[k - 1]):.6g} "
            f"<= sum eps_j (R_j + 1) = {float(S):.6g} (or R not increasing)")
    xs, ts, ds = [0], [1.0], []
    for k in range(K):
        # stage k+1 (1-based) is placed; pick t (except the first) then d
        if k > 0:
            xk = (-1) ** k * ds[-1]
            t = ts[-1] * 2.0
            while stage_bound(eps, R, k, xk, t) >= 0:
                t *= 2.0
                if t > t_cap:
                    raise ConstructionError(
                        f"no t_{k + 1} <= {t_cap:g} makes 2 sum eps_j(R_j+1) - eps_{k + 1} int_plateau < 0")
            xs.append(xk)
            ts.append(t)
        t = ts[-1]
        xk = xs[-1]
        d_min = (ds[-1] if ds else 0) + R[k + 1] + R[k] + 3
        if not ds:
            d_min = R[0] + R[1] + 3
        d = d_min
        while stage_bound(eps, R, k, xk, t, D=d - R[k + 1] - 1) >= 0:
            d *= 2
            if d > d_cap:
                raise ConstructionError(
                    f"no d_{k + 1} <= {d_cap:g} makes the stage-{k + 1} bound plus tail negative")
        ds.append(int(d))
    seq = StageSequences(K, eps[:K], R[:K + 1], tuple(xs), tuple(ts), tuple(ds))
    problems = verify(seq)
    if problems:
        raise ConstructionError("; ".join(problems))
    z = ZField(seq)
    return seq, z, v0_evaluator(seq, base_w)


def verify(seq: StageSequences):
    """Exact-arithmetic checks of the sequence conditions; returns a list of failures."""
    out = []
    if not all(0 < e < 1 for e in seq.eps):
        out.append("(a1): eps_k not in (0, 1)")
    k = check_a2(seq.eps, seq.R[:seq.K])
    if k is not None:
        out.append(f"(a2) fails at k = {k}")
    j = check_separation(seq.x, seq.R)
    if j is not None:
        out.append(f"separation fails at j = {j}")
    if not all(b > a for a, b in zip(seq.t, seq.t[1:])):
        out.append("t_k not increasing")
    if not all(b > a for a, b in zip(seq.d, seq.d[1:])):
        out.append("d_k not increasing")
    if not all(abs(b) > abs(a) for a, b in zip(seq.x, seq.x[1:])):
        out.append("|x_k| not increasing")
    if not all((-1) ** (k) * x >= 0 for k, x in enumerate(seq.x)):
        out.append("sign pattern of x_k")
    for k in range(seq.K - 1):
        if not abs(seq.x[k + 1]) >= seq.d[k]:
            out.append(f"|x_{k + 2}| < d_{k + 1}")
    return out


class ZField:
    """z(x) = sum_k (-1)^(k+1) z_k(x - x_k) for a finite stage list."""

    def __init__(self, seq: StageSequences, stages=None):
        self.seq = seq
        self.stages = range(seq.K) if stages is None else tuple(stages)

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        out = np.zeros_like(y)
        for k in self.stages:
            out += (-1) ** k * plateau(y - self.seq.x[k], self.seq.R[k], float(self.seq.eps[k]))
        return out

    def pieces(self):
        """(lo, hi, kind, k) pieces of the support: 'shoulder' or 'plateau'."""
        out = []
        for k in self.stages:
            x, R = self.seq.x[k], self.seq.R[k]
            out += [(x - R - 1, x - R, "shoulder", k), (x - R, x + R, "plateau", k),
                    (x + R, x + R + 1, "shoulder", k)]
        return sorted(out)

    def gauss_integral(self, t, tol=1e-10):
        """int exp(-y^2/4t) z(y) dy by adaptive quadrature, piece by piece."""
        total = 0.0
        n = len(self.pieces())
        for lo, hi, _, _ in self.pieces():
            f = lambda y: np.exp(-y * y / (4.0 * t)) * self(y)
            val, _ = integrate(f, lo, hi, tol=tol / n, points=(0.0,), initial=2)
            total += val
        return float(total)


def v0_evaluator(seq: StageSequences, w=base_w):
    z = ZField(seq)
    return lambda x: w(x) + 1j * z(x)


def sign_certificate(seq: StageSequences, z=None, tol=1e-10):
    z = z or ZField(seq)
    rows = []
    for j, t in enumerate(seq.t, start=1):
        val = z.gauss_integral(t, tol=tol)
        rows.append((t, (-1) ** j * val, (-1) ** j * val < 0))
    return rows


def im_v_axis(z: ZField, t, tol=1e-12):
    """Im v(0, t) = (4 pi t)^(-1/2) int exp(-y^2/4t) z dy."""
    return z.gauss_integral(t, tol=tol) / math.sqrt(4.0 * math.pi * t)


def find_tau(seq: StageSequences, j, z=None, rtol=1e-8):
    """Zero of t -> Im v(0, t) in (t_j, t_{j+1}) by bisection (1-based j)."""
    z = z or ZField(seq)
    a, b = seq.t[j - 1], seq.t[j]
    fa, fb = im_v_axis(z, a), im_v_axis(z, b)
    if fa * fb >= 0:
        raise ConstructionError(f"no sign change of Im v(0, t) on [t_{j}, t_{j + 1}]")
    while b - a > rtol * max(1.0, a):
        m = 0.5 * (a + b)
        fm = im_v_axis(z, m)
        if fm == 0:
            return m
        if (fm < 0) == (fa < 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def decomposition(seq: StageSequences, w=base_w, w_width=1.0):
    """Step decomposition of v0 = w + i z with A = 1, B = -1 (a = 2, b = 0).

    w + sign(x) must vanish for |x| >= w_width.
    """
    z = ZField(seq)

    def w0(x):
        x = np.asarray(x, dtype=float)
        return w(x) + np.sign(x) + 1j * z(x)

    smooth = [(-w_width, 0.0, w_width), (0.0, w_width, w_width)]
    for lo, hi, kind, _ in z.pieces():
        if kind == "shoulder":
            smooth.append((float(lo), float(hi), 0.5))
    pts = sorted({p for lo, hi, _ in smooth for p in (lo, hi)}
                 | {float(p) for lo, hi, _, _ in z.pieces() for p in (lo, hi)})
    segs = []
    for lo, hi in zip(pts[:-1], pts[1:]):
        mid = 0.5 * (lo + hi)
        scales = [s for a, b, s in smooth if a < mid < b]
        if scales:
            segs.append(Segment(lo, hi, min(scales)))
        else:
            val = complex(w0(np.array([mid]))[0])
            if val != 0:
                segs.append(Segment(lo, hi, hi - lo, val))
    L = max(abs(pts[0]), abs(pts[-1]))
    return StepDecomposition(B=-1.0 + 0j, w0=w0, L=L, segments=tuple(segs), v0=v0_evaluator(seq))


def heat_field(seq: StageSequences, tol=1e-10, w=base_w, w_width=1.0):
    return HeatField(decomposition(seq, w, w_width), tol=tol)


def epsilon0(seq: StageSequences, n_per_unit=64, w=base_w):
    """min |v0| on a dense grid covering the base step and every bump."""
    v0 = v0_evaluator(seq, w)
    z = ZField(seq)
    grids = [np.linspace(-3.0, 3.0, 6 * n_per_unit + 1)]
    for lo, hi, kind, _ in z.pieces():
        if kind == "shoulder":
            grids.append(np.linspace(lo, hi, n_per_unit + 1))
        else:
            grids.append(np.linspace(lo, hi, min(int(hi - lo) * 4 + 1, 200001)))
    x = np.concatenate(grids)
    return float(np.min(np.abs(v0(x))))


def export(seq: StageSequences, json_path=None, csv_path=None, n_per_unit=16):
    doc = seq.to_json()
    if json_path is not None:
        with open(json_path, "w") as fh:
            json.dump(doc, fh, indent=2)
    if csv_path is not None:
        z = ZField(seq)
        with open(csv_path, "w") as fh:
            fh.write("x,z\n")
            for lo, hi, kind, _ in z.pieces():
                n = n_per_unit if kind == "shoulder" else max(2, min(int(hi - lo), 4096))
                xs = np.linspace(lo, hi, n + 1)
                for xv, zv in zip(xs, z(xs)):
                    fh.write(f"{xv:.17g},{zv:.17g}\n")
    return doc
