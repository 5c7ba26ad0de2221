"""Complex initial data u0 assembled from bump and gaussian primitives."""
from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from numpy.polynomial import Chebyshev

from .quadrature import integrate
from .special import F

KINDS = ("bump", "gaussian")
_CHEB_DEGREE = 256


class ScenarioError(ValueError):
    """Malformed scenario document or primitive."""


class NonCompactError(ValueError):
    """Raised by operations that need compactly supported data."""


def mollifier(s):
    """exp(-1/(1 - s^2)) on (-1, 1), zero elsewhere."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    si = s[inside]
    out[inside] = np.exp(-1.0 / (1.0 - si * si))
    return out


@functools.cache
def _bump_tables():
    # Chebyshev interpolant of the mollifier; its integral is the CDF and the
    # value at s = 1 is the mass (Clenshaw-Curtis quadrature)
    cdf = Chebyshev.interpolate(mollifier, _CHEB_DEGREE).integ(lbnd=-1.0)
    mass = float(cdf(1.0))
    return mass, cdf, mass


def bump_mass():
    """Integral of the unit mollifier over [-1, 1] (about 0.443994)."""
    return _bump_tables()[0]


def bump_cdf(s):
    """Normalised antiderivative of the mollifier: 0 at s <= -1, 1 at s >= 1."""
    _, cdf, total = _bump_tables()
    s = np.asarray(s, dtype=float)
    out = np.where(s >= 1.0, 1.0, 0.0)
    inside = np.abs(s) < 1.0
    out[inside] = cdf(s[inside]) / total
    return out


@dataclass(frozen=True)
class Primitive:
    kind: str
    center: float
    radius: float
    mass: complex

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ScenarioError(f"unknown primitive kind {self.kind!r}")
        for name in ("center", "radius"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
                raise ScenarioError(f"{name} must be a finite number, got {v!r}")
        if not self.radius > 0:
            raise ScenarioError(f"radius must be positive, got {self.radius!r}")
        m = complex(self.mass)
        if not (math.isfinite(m.real) and math.isfinite(m.imag)):
            raise ScenarioError(f"mass must be finite, got {self.mass!r}")
        object.__setattr__(self, "center", float(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "mass", m)

    @property
    def compact(self):
        return self.kind == "bump"

    @property
    def support(self):
        if self.compact:
            return self.center - self.radius, self.center + self.radius
        return -math.inf, math.inf

    def value(self, x):
        s = (np.asarray(x, dtype=float) - self.center) / self.radius
        if self.kind == "bump":
            shape = mollifier(s) / (bump_mass() * self.radius)
        else:
            shape = np.exp(-0.5 * s * s) / (math.sqrt(2 * math.pi) * self.radius)
        return self.mass * shape

    def cumulative(self, x):
        s = (np.asarray(x, dtype=float) - self.center) / self.radius
        if self.kind == "bump":
            frac = bump_cdf(s)
        else:
            frac = 0.5 + F(s)
        return self.mass * frac


@dataclass(frozen=True)
class MassReport:
    I: float
    J: float
    absJ: float
    L: float


@dataclass(frozen=True)
class Scenario:
    primitives: tuple = ()
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "primitives", tuple(self.primitives))
        if any(p.kind == "bump" for p in self.primitives):
            _bump_tables()

    @property
    def compact(self):
        return all(p.compact for p in self.primitives)

    @property
    def L(self):
        """Support radius: u0 vanishes outside [-L, L]."""
        if not self.compact:
            return math.inf
        return max((abs(p.center) + p.radius for p in self.primitives), default=0.0)

    @property
    def total_mass(self):
        return sum((p.mass for p in self.primitives), 0j)

    def require_compact(self):
        if not self.compact:
            raise NonCompactError(f"scenario {self.label!r} has non-compact (gaussian) primitives")

    def u0(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        for p in self.primitives:
            out += p.value(x)
        return out

    def U0(self, x):
        """int_{-inf}^x u0."""
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        for p in self.primitives:
            out += p.cumulative(x)
        return out

    def breakpoints(self):
        pts = set()
        for p in self.primitives:
            if p.compact:
                pts.update((p.center - p.radius, p.center, p.center + p.radius))
            else:
                pts.add(p.center)
        return sorted(pts)

    def shifted(self, dx):
        return Scenario(tuple(replace(p, center=p.center + dx) for p in self.primitives), self.label)

    def reflected(self):
        return Scenario(tuple(replace(p, center=-p.center) for p in self.primitives), self.label)

    def scaled(self, lam):
        return Scenario(tuple(replace(p, mass=p.mass * lam) for p in self.primitives), self.label)

    def __add__(self, other):
        label = "+".join(s for s in (self.label, other.label) if s)
        return Scenario(self.primitives + other.primitives, label)

    def to_dict(self):
        return {
            "label": self.label,
            "primitives": [
                {"kind": p.kind, "center": p.center, "radius": p.radius,
                 "mass_re": p.mass.real, "mass_im": p.mass.imag}
                for p in self.primitives
            ],
        }


def bump(center, radius, mass):
    return Primitive("bump", center, radius, mass)


def evaluate_u0(s: Scenario, x):
    return s.u0(x)


def cumulative_mass(s: Scenario, x):
    return s.U0(x)


def masses(s: Scenario) -> MassReport:
    total = s.total_mass
    I, J = total.real, total.imag
    ims = [p.mass.imag for p in s.primitives]
    if all(m >= 0 for m in ims) or all(m <= 0 for m in ims):
        absJ = abs(J)
    else:
        absJ = _abs_imag_mass(s)
    return MassReport(I=I, J=J, absJ=absJ, L=s.L)


def _abs_imag_mass(s, tol=1e-10):
    lo, hi = math.inf, -math.inf
    for p in s.primitives:
        a, b = (p.center - 40 * p.radius, p.center + 40 * p.radius) if not p.compact else p.support
        lo, hi = min(lo, a), max(hi, b)
    val, _ = integrate(lambda x: np.abs(s.u0(x).imag), lo, hi, tol=tol,
                       points=s.breakpoints(), initial=8)
    return float(val)


def _number(obj, key, where):
    if key not in obj:
        raise ScenarioError(f"{where}: missing field {key!r}")
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ScenarioError(f"{where}: field {key!r} must be a number, got {v!r}")
    v = float(v)
    if math.isnan(v):
        raise ScenarioError(f"{where}: field {key!r} is NaN")
    return v


def load_scenario(source) -> Scenario:
    """Build a Scenario from JSON text, a parsed mapping, or a path to a JSON file."""
    if isinstance(source, Path):
        try:
            source = source.read_text()
        except OSError as exc:
            raise ScenarioError(f"cannot read scenario file: {exc}") from exc
    if isinstance(source, (str, bytes)):
        try:
            doc = json.loads(source)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"scenario is not valid JSON: {exc}") from exc
    else:
        doc = source
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be an object")
    unknown = set(doc) - {"label", "primitives"}
    if unknown:
        raise ScenarioError(f"unknown top-level fields {sorted(unknown)}")
    label = doc.get("label", "")
    if not isinstance(label, str):
        raise ScenarioError("label must be a string")
    prims = doc.get("primitives")
    if not isinstance(prims, list):
        raise ScenarioError("primitives must be a list")
    out = []
    for i, obj in enumerate(prims):
        where = f"primitives[{i}]"
        if not isinstance(obj, dict):
            raise ScenarioError(f"{where} must be an object")
        kind = obj.get("kind")
        if kind not in KINDS:
            raise ScenarioError(f"{where}: kind must be one of {KINDS}, got {kind!r}")
        center = _number(obj, "center", where)
        radius = _number(obj, "radius", where)
        mass = complex(_number(obj, "mass_re", where), _number(obj, "mass_im", where))
        out.append(Primitive(kind, center, radius, mass))
    return Scenario(tuple(out), label)
