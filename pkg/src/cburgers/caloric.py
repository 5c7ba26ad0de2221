"""Caloric polynomials P_m(x, t) = sum_k m!/(k!(m-2k)!) x^(m-2k) t^k.

Coefficients are exact integers (Python ints do not overflow, so no float
fallback is needed for large m). P_m factors as x^(m mod 2) prod_j (x^2 + a_j t)
with 0 < a_1 < ... < a_k, and P_m(x, -1) is a rescaled Hermite polynomial.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
from mpmath.libmp.libhyper import NoConvergence
import numpy as np

from .fields import PolyField


class RootExtractionError(RuntimeError):
    pass


@dataclass(frozen=True)
class CaloricPolynomial:
    m: int
    terms: tuple  # ((i, j, coeff), ...) for coeff * x^i t^j

    @property
    def t_coeffs(self):
        """c_k multiplying x^(m-2k) t^k, k = 0..m//2."""
        return [c for _, _, c in sorted(self.terms, key=lambda r: r[1])]

    def as_dict(self):
        return {(i, j): c for i, j, c in self.terms}

    def __call__(self, x, t):
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        return sum(float(c) * x ** i * t ** j for i, j, c in self.terms)

    def field(self, scale=1.0):
        return PolyField({(i, j): float(c) * scale for i, j, c in self.terms})

    def __str__(self):
        parts = []
        for i, j, c in self.terms:
            mono = "*".join(p for p in (f"x^{i}" if i > 1 else ("x" if i == 1 else ""),
                                        f"t^{j}" if j > 1 else ("t" if j == 1 else "")) if p)
            parts.append(f"{c}*{mono}" if mono and c != 1 else (mono or str(c)))
        return " + ".join(parts) if parts else "0"


def caloric_poly(m: int) -> CaloricPolynomial:
    if not (isinstance(m, int) and m >= 0):
        raise ValueError(f"m must be a non-negative integer, got {m!r}")
    f = math.factorial
    terms = tuple((m - 2 * k, k, f(m) // (f(k) * f(m - 2 * k))) for k in range(m // 2 + 1))
    return CaloricPolynomial(m, terms)


def _diff(poly, dx=0, dt=0):
    out = {}
    for (i, j), c in poly.items():
        if i < dx or j < dt:
            continue
        k = c * math.perm(i, dx) * math.perm(j, dt)
        out[(i - dx, j - dt)] = out.get((i - dx, j - dt), 0) + k
    return {k: v for k, v in out.items() if v != 0}


def heat_defect(p: CaloricPolynomial):
    """Coefficients of P_t - P_xx; an empty dict means the identity holds exactly."""
    pt = _diff(p.as_dict(), dt=1)
    pxx = _diff(p.as_dict(), dx=2)
    keys = set(pt) | set(pxx)
    return {k: pt.get(k, 0) - pxx.get(k, 0) for k in keys if pt.get(k, 0) != pxx.get(k, 0)}


def homogeneity_defect(p: CaloricPolynomial, x, t, lam):
    lhs = p(lam * x, lam * lam * t)
    rhs = lam ** p.m * p(x, t)
    return abs(lhs - rhs) / max(abs(rhs), 1e-300)


def _expand_product(roots):
    """Coefficients of prod_j (s - r_j), highest degree first."""
    c = [mpmath.mpf(1)]
    for r in roots:
        c = [a - r * b for a, b in zip(c + [0], [0] + c)]
    return c


def factor_roots(p: CaloricPolynomial, dps=None, return_residual=False):
    """a_1 < ... < a_k with P_m = x^(m mod 2) prod (x^2 + a_j t).

    The a_j are the roots of q(s) = sum_k (-1)^k c_k s^(k_max - k), i.e. the
    squares of the positive roots of P_m(x, -1). Roots come from mpmath's
    polynomial solver at extended precision.
    """
    if p.m < 2:
        raise ValueError("factor_roots needs m >= 2")
    c = p.t_coeffs
    n = len(c) - 1
    if n == 0:
        return ([], 0.0) if return_residual else []
    q = [(-1) ** k * c[k] for k in range(n + 1)]
    dps = dps or max(30, 2 * p.m + 20)
    with mpmath.workdps(dps):
        try:
            roots = mpmath.polyroots([mpmath.mpf(v) for v in q], maxsteps=500, extraprec=4 * dps)
        except NoConvergence as exc:
            raise RootExtractionError(f"root extraction failed for m = {p.m}") from exc
        roots = [complex(r) for r in roots]
        if any(abs(r.imag) > 1e-20 * max(1.0, abs(r)) or r.real <= 0 for r in roots):
            raise RootExtractionError(f"non-positive or complex a_j for m = {p.m}: {roots}")
        # residual of the roots actually returned (rounded to doubles)
        a = sorted(mpmath.mpf(float(r.real)) for r in roots)
        re = _expand_product(a)
        resid = max(abs(re[k] - q[k]) / abs(q[k]) for k in range(n + 1))
    out = [float(v) for v in a]
    if resid > 1e-10:
        raise RootExtractionError(f"re-expansion residual {float(resid):.3g} for m = {p.m}")
    if any(b <= a_ for a_, b in zip(out, out[1:])):
        raise RootExtractionError(f"a_j not strictly increasing for m = {p.m}")
    return (out, float(resid)) if return_residual else out


def hermite_physicists(n):
    """Integer coefficients (lowest degree first) from H_{k+1} = 2x H_k - 2k H_{k-1}."""
    h0, h1 = [1], [0, 2]
    if n == 0:
        return h0
    for k in range(1, n):
        nxt = [0] + [2 * c for c in h1]
        for i, c in enumerate(h0):
            nxt[i] -= 2 * k * c
        h0, h1 = h1, nxt
    return h1


def _at_minus_one(p: CaloricPolynomial):
    """Coefficients of P_m(x, -1), lowest degree first."""
    out = [0] * (p.m + 1)
    for i, j, c in p.terms:
        out[i] += c * (-1) ** j
    return out


def _frac_sqrt(q: Fraction):
    n, d = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if n * n != q.numerator or d * d != q.denominator:
        raise ValueError(f"{q} is not a rational square")
    return Fraction(n, d)


def hermite_normalization():
    """(sigma, kappa) with P_m(x, -1) = kappa^m H_m(sigma x), fitted on m = 1, 2."""
    p2 = _at_minus_one(caloric_poly(2))
    h2 = hermite_physicists(2)
    # P_2(x,-1) = p2[2] x^2 + p2[0]; H_2(sigma x) = h2[2] sigma^2 x^2 + h2[0]
    ratio = Fraction(p2[2], p2[0]) / Fraction(h2[2], h2[0])
    sigma = _frac_sqrt(ratio)
    p1 = _at_minus_one(caloric_poly(1))
    h1 = hermite_physicists(1)
    kappa = Fraction(p1[1], h1[1]) / sigma
    return sigma, kappa


def hermite_check(p: CaloricPolynomial):
    """Max coefficient deviation between P_m(x, -1) and kappa^m H_m(sigma x)."""
    sigma, kappa = hermite_normalization()
    h = hermite_physicists(p.m)
    ref = [kappa ** p.m * c * sigma ** i for i, c in enumerate(h)]
    got = _at_minus_one(p)
    return max(abs(Fraction(g) - r) for g, r in zip(got, ref))


@dataclass(frozen=True)
class BranchSeed:
    b: float
    f0: float

    def point(self, y):
        """(x, t) on the model branch x = b y + y^2 f0, t = -y^2."""
        return self.b * y + y * y * self.f0, -y * y


def _h(m):
    """x -> P_m(x, -1) and its derivative as numpy polynomials."""
    c = [float(v) for v in _at_minus_one(caloric_poly(m))]
    P = np.polynomial.Polynomial(c)
    return P, P.deriv()


def local_branch_model(m, perturbation=None, a_m=1.0):
    """Branch seeds of a_m P_m + sum_j a_j P_j (j > m) near the origin.

    Substituting x = b y + y^2 f, t = -y^2 and dividing by y^(m+1) gives
    f = F(y, f); at y = 0 the right side does not depend on f, so one
    evaluation gives f0 = -a_{m+1} P_{m+1}(b, -1) / (a_m P_m'(b, -1)).
    """
    if m < 3:
        raise ValueError("the singular local model needs m >= 3")
    perturbation = dict(perturbation or {})
    roots = factor_roots(caloric_poly(m))
    bs = sorted([-math.sqrt(a) for a in roots] + [math.sqrt(a) for a in roots])
    if m % 2:
        bs = sorted(bs + [0.0])
    hm, dhm = _h(m)
    nxt = perturbation.get(m + 1, 0.0)
    h1 = _h(m + 1)[0] if nxt else None
    seeds = []
    for b in bs:
        f0 = 0.0
        if nxt:
            f0 = -nxt * h1(b) / (a_m * dhm(b))
        seeds.append(BranchSeed(b, float(f0)))
    return seeds


def perturbed_field(m, perturbation=None, a_m=1.0):
    """a_m P_m + sum_j a_j P_j as a PolyField."""
    fld = caloric_poly(m).field(a_m)
    for j, aj in dict(perturbation or {}).items():
        fld = fld + caloric_poly(j).field(aj)
    return fld


def branch_count(fld, m, depth=1e-2, n=20000):
    """Number of nodal branches of a real field entering t < 0 at the origin.

    Every branch is tangent to a parabola t = -x^2/a_j (or to x = 0), so each
    crosses the line t = -depth^2 once within |x| <= 3 sqrt(2m+1) depth.
    """
    half = 3.0 * math.sqrt(2 * m + 1) * depth
    x = np.linspace(-half, half, n)
    vals = np.real(fld.eval(x, np.full_like(x, -depth * depth))[0])
    return int(np.count_nonzero(np.sign(vals[1:]) != np.sign(vals[:-1])))
