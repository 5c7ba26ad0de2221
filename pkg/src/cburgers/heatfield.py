"""Semi-analytic heat flow of a step-plus-compact initial datum.

v(x, t) = -a F(x / sqrt(2t)) + b + w(x, t),   w = Gamma(., t) * w0.

The step part is closed form. The remainder w and its first two x-derivatives
come from composite Gauss-Kronrod panels over supp w0, with panel widths tied
to sqrt(t). Panel layouts are cached per dyadic level of sqrt(t) and accepted
only after two successive refinements agree to the tolerance on probe points.
"""
from __future__ import annotations

import math
import threading

import numpy as np

from .colehopf import StepDecomposition
from .quadrature import QuadratureError, integrate, panel_rule
from .special import F, heat_kernel, heat_kernel_x

WINDOW = 14.0  # kernel cut-off in units of sqrt(t): exp(-49) ~ 5e-22
_MAX_BLOCK = 2_000_000
_MAX_NODES = 4_000_000


class HeatField:
    def __init__(self, decomposition: StepDecomposition, tol=1e-10, max_refine=6):
        self.dec = decomposition
        self.tol = tol
        self.max_refine = max_refine
        self._smooth = [s for s in decomposition.segments if s.value is None]
        const = [s for s in decomposition.segments if s.value is not None and s.value != 0]
        self._c_lo = np.array([s.lo for s in const])
        self._c_hi = np.array([s.hi for s in const])
        self._c_val = np.array([s.value for s in const], dtype=complex)
        if self._smooth:
            finest = max(s.scale for s in self._smooth) / 8.0
            self._top_level = math.ceil(math.log2(finest))
        else:
            self._top_level = 0
        self._layouts = {}
        self._accepted = {}
        self._lock = threading.Lock()

    @property
    def a(self):
        return self.dec.a

    @property
    def b(self):
        return self.dec.b

    @property
    def L(self):
        return self.dec.L

    # -- panel layouts -------------------------------------------------
    def _level(self, t):
        return min(math.floor(0.5 * math.log2(t)), self._top_level)

    def _get_layout(self, level, refine):
        key = (level, refine)
        lay = self._layouts.get(key)
        if lay is not None:
            return lay
        width_t = 2.0 ** level
        nodes, weights = [], []
        for seg in self._smooth:
            h = min(seg.scale / 8.0, width_t) * 2.0 ** (-refine)
            n = max(1, math.ceil((seg.hi - seg.lo) / h - 1e-9))
            y, wt = panel_rule(np.linspace(seg.lo, seg.hi, n + 1))
            nodes.append(y)
            weights.append(wt)
        if nodes:
            y = np.concatenate(nodes)
            wt = np.concatenate(weights)
        else:
            y = np.zeros(0)
            wt = np.zeros(0)
        if y.size > _MAX_NODES:
            raise QuadratureError(f"panel layout needs {y.size} nodes (t too small for this support)")
        g = wt * self.dec.w0(y) if y.size else np.zeros(0, dtype=complex)
        lay = (y, np.asarray(g, dtype=complex))
        with self._lock:
            self._layouts.setdefault(key, lay)
        return lay

    def _refine_for(self, level):
        r = self._accepted.get(level)
        if r is not None:
            return r
        if not self._smooth:
            r = 0
        else:
            r = self._validate(level)
        with self._lock:
            self._accepted.setdefault(level, r)
        return r

    def _validate(self, level):
        t_probe = [4.0 ** level, 0.999 * 4.0 ** (level + 1)]
        if level == self._top_level:
            t_probe = [4.0 ** level]
        worst = math.inf
        for r in range(self.max_refine):
            coarse = self._get_layout(level, r)
            fine = self._get_layout(level, r + 1)
            worst = 0.0
            for t in t_probe:
                st = math.sqrt(t)
                xs = np.linspace(-self.L - 6 * st, self.L + 6 * st, 257)
                edges = np.array([s.lo for s in self._smooth] + [s.hi for s in self._smooth])
                xs = np.concatenate([xs, edges + 0.3 * st, edges - 0.3 * st])
                w1 = self._remainder(xs, t, coarse)
                w2 = self._remainder(xs, t, fine)
                err = (np.abs(w1[0] - w2[0]) + st * np.abs(w1[1] - w2[1])
                       + t * np.abs(w1[2] - w2[2]))
                worst = max(worst, float(err.max()))
            if worst <= self.tol:
                return r
        raise QuadratureError(
            f"heat-kernel quadrature did not converge at sqrt(t)~2^{level} "
            f"after {self.max_refine} refinements (last change {worst:.3g})")

    # -- evaluation ----------------------------------------------------
    def _remainder(self, x, t, layout):
        """(w, w_x, w_xx) at points x for a single time t."""
        y, g = layout
        n = x.size
        w = np.zeros(n, dtype=complex)
        wx = np.zeros(n, dtype=complex)
        wxx = np.zeros(n, dtype=complex)
        st = math.sqrt(t)
        reach = WINDOW * st
        norm = 1.0 / math.sqrt(4.0 * math.pi * t)
        if y.size:
            order = np.argsort(x, kind="stable")
            xs = x[order]
            start = 0
            while start < n:
                stop = min(n, start + 256)
                while True:
                    i0 = np.searchsorted(y, xs[start] - reach)
                    i1 = np.searchsorted(y, xs[stop - 1] + reach, side="right")
                    if (stop - start) * (i1 - i0) <= _MAX_BLOCK or stop - start == 1:
                        break
                    stop = start + max(1, (stop - start) // 2)
                if i1 > i0:
                    sel = order[start:stop]
                    z = xs[start:stop, None] - y[None, i0:i1]
                    E = np.exp(z * z * (-0.25 / t)) * norm
                    gg = g[i0:i1]
                    s0 = E @ gg
                    Ez = E * z
                    s1 = Ez @ gg
                    s2 = (Ez * z) @ gg
                    w[sel] = s0
                    wx[sel] = -s1 / (2.0 * t)
                    wxx[sel] = s2 / (4.0 * t * t) - s0 / (2.0 * t)
                start = stop
        if self._c_val.size:
            r2 = math.sqrt(2.0 * t)
            zl = x[:, None] - self._c_lo[None, :]
            zh = x[:, None] - self._c_hi[None, :]
            w += (F(zl / r2) - F(zh / r2)) @ self._c_val
            wx += (heat_kernel(zl, t) - heat_kernel(zh, t)) @ self._c_val
            wxx += (heat_kernel_x(zl, t) - heat_kernel_x(zh, t)) @ self._c_val
        return w, wx, wxx

    def _row(self, x, t):
        level = self._level(t)
        return self._remainder(x, t, self._get_layout(level, self._refine_for(level)))

    def eval_w(self, x, t):
        """Remainder (w, w_x, w_xx) broadcast over x and t."""
        x, t = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(t, dtype=float))
        if np.any(~(t > 0)):
            raise ValueError("heat field is defined for t > 0 only")
        shape = x.shape
        xf, tf = x.ravel(), t.ravel()
        out = [np.zeros(xf.size, dtype=complex) for _ in range(3)]
        uniq, inv = np.unique(tf, return_inverse=True)
        if uniq.size == 1:
            res = self._row(xf, float(uniq[0]))
            for o, r in zip(out, res):
                o[:] = r
        else:
            groups = np.argsort(inv, kind="stable")
            bounds = np.searchsorted(inv[groups], np.arange(uniq.size + 1))
            for k, tv in enumerate(uniq):
                idx = groups[bounds[k]:bounds[k + 1]]
                res = self._row(xf[idx], float(tv))
                for o, r in zip(out, res):
                    o[idx] = r
        return tuple(_shaped(o, shape) for o in out)

    def eval(self, x, t):
        """(v, v_x, v_xx) at (x, t); v_t equals v_xx."""
        w, wx, wxx = self.eval_w(x, t)
        x, t = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(t, dtype=float))
        a, b = self.a, self.b
        v = -a * F(x / np.sqrt(2.0 * t)) + b + w
        vx = -a * heat_kernel(x, t) + wx
        vxx = -a * heat_kernel_x(x, t) + wxx
        return v, vx, vxx

    def u(self, x, t):
        v, vx, _ = self.eval(x, t)
        return -2.0 * vx / v

    @property
    def limits(self):
        return self.dec.A, self.dec.B

    def w0_l1(self):
        total = 0.0
        for seg in self.dec.segments:
            if seg.value is not None:
                total += abs(seg.value) * (seg.hi - seg.lo)
            else:
                val, _ = integrate(lambda y: np.abs(self.dec.w0(y)), seg.lo, seg.hi, tol=1e-12)
                total += val
        return float(total)


def _shaped(arr, shape):
    arr = arr.reshape(shape)
    return arr[()] if arr.ndim == 0 else arr


def evaluate(hf: HeatField, x, t):
    return hf.eval(x, t)


DECAY_CONSTANT = (1.0 + math.exp(-0.5) / math.sqrt(2.0)) / math.sqrt(4.0 * math.pi)


def decay_bound(hf: HeatField, t, n=4097):
    """sup_x |w| + sqrt(t) |w_x| on a dense grid, with the kernel bound C/sqrt(t).

    C = ||w0||_1 * (1 + e^(-1/2)/sqrt 2) / sqrt(4 pi) bounds the sup of
    |Gamma| + sqrt(t)|Gamma_x| times sqrt(t).
    """
    if not t > 0:
        raise ValueError("t must be positive")
    st = math.sqrt(t)
    x = np.linspace(-hf.L - 10 * st, hf.L + 10 * st, n)
    w, wx, _ = hf.eval_w(x, t)
    value = float(np.max(np.abs(w) + st * np.abs(wx)))
    bound = hf.w0_l1() * DECAY_CONSTANT / st
    return value, bound


def appell(hf: HeatField, xt, tt, tol=1e-13):
    """Appell transform of the remainder: int w0(y) exp(xt*y/2 + tt*y^2/4) dy.

    With this sign convention w(x, t) = Gamma(x, t) * appell(x/t, -1/t) and the
    transform extends to tt >= 0 because w0 has compact support.
    """
    def f(y):
        return hf.dec.w0(y) * np.exp(0.5 * xt * y + 0.25 * tt * y * y)

    total = 0j
    for seg in hf.dec.segments:
        val, _ = integrate(f, seg.lo, seg.hi, tol=tol, initial=4)
        total += val
    return complex(total)
