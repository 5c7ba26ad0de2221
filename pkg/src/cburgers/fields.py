"""Closed-form caloric fields given as polynomials in (x, t).

These share the evaluator protocol of HeatField: eval(x, t) -> (v, v_x, v_xx).
"""
from __future__ import annotations

import numpy as np


class PolyField:
    """v(x, t) = sum c[i, j] x^i t^j with complex coefficients.

    Only the pair (v_x, v_xx) is returned for derivatives; callers use
    v_t = v_xx, which holds when the polynomial is caloric (checked by
    ``is_caloric``).
    """

    def __init__(self, coeffs):
        self.coeffs = {(int(i), int(j)): complex(c) for (i, j), c in dict(coeffs).items() if c != 0}

    def _sum(self, terms, x, t):
        out = np.zeros(np.broadcast(x, t).shape, dtype=complex)
        for (i, j), c in terms.items():
            out = out + c * x ** i * t ** j
        return out

    def derivative(self, dx=0, dt=0):
        terms = {}
        for (i, j), c in self.coeffs.items():
            if i < dx or j < dt:
                continue
            f = 1
            for k in range(dx):
                f *= i - k
            for k in range(dt):
                f *= j - k
            terms[(i - dx, j - dt)] = terms.get((i - dx, j - dt), 0) + f * c
        return PolyField(terms)

    def is_caloric(self):
        d = self.derivative(dt=1).coeffs
        e = self.derivative(dx=2).coeffs
        keys = set(d) | set(e)
        return all(abs(d.get(k, 0) - e.get(k, 0)) == 0 for k in keys)

    def eval(self, x, t):
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        v = self._sum(self.coeffs, x, t)
        vx = self._sum(self.derivative(dx=1).coeffs, x, t)
        vxx = self._sum(self.derivative(dx=2).coeffs, x, t)
        return _squeeze(v), _squeeze(vx), _squeeze(vxx)

    def conjugate(self):
        return PolyField({k: c.conjugate() for k, c in self.coeffs.items()})

    def scaled(self, factor):
        return PolyField({k: c * factor for k, c in self.coeffs.items()})

    def __add__(self, other):
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, 0) + c
        return PolyField(out)


def _squeeze(a):
    return a[()] if a.ndim == 0 else a


def closed_form_field(sign=1):
    """v = x + sign*i*(x^2 + 2t - 1): one simple zero at (0, 1/2)."""
    s = 1j * sign
    return PolyField({(1, 0): 1.0, (2, 0): s, (0, 1): 2 * s, (0, 0): -s})


class ScaledField:
    """r e^{i theta} * field; windings are unchanged."""

    def __init__(self, field, factor):
        self.field = field
        self.factor = complex(factor)

    def eval(self, x, t):
        return tuple(self.factor * np.asarray(q) for q in self.field.eval(x, t))
