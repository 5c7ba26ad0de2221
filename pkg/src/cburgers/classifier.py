"""Mass-based verdicts: global decay, boundary case, blow-up, or indeterminate.

The rules only look at J = int Im u0 and absJ = int |Im u0|:

  global-decay     absJ <= 2 pi and |J| < 2 pi
  global-boundary  |J| = absJ = 2 pi
  blow-up          |J| > 2 pi and J not of the form 2 pi + 4 k pi
  indeterminate    anything else

Comparisons use a band of width TOL; inside the band the exact-case rule
applies, so near-threshold data is never sent to an open-condition verdict.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .scenario import MassReport, Scenario, masses

TOL = 1e-9
TWO_PI = 2.0 * math.pi

GLOBAL_DECAY = "global-decay"
GLOBAL_BOUNDARY = "global-boundary"
BLOW_UP = "blow-up"
INDETERMINATE = "indeterminate"
VERDICTS = (GLOBAL_DECAY, GLOBAL_BOUNDARY, BLOW_UP, INDETERMINATE)


@dataclass(frozen=True)
class Classification:
    verdict: str
    evidence: MassReport
    rule: str


def excluded_index(J, tol=TOL):
    """k if J = 2 pi + 4 k pi within tol (J an odd multiple of 2 pi), else None."""
    q = (J - TWO_PI) / (4.0 * math.pi)
    k = round(q)
    if abs(J - (TWO_PI + 4.0 * math.pi * k)) <= tol:
        return int(k)
    return None


def classify_masses(m: MassReport, tol=TOL) -> Classification:
    J, absJ = m.J, m.absJ
    aJ = abs(J)
    if abs(aJ - TWO_PI) <= tol and abs(absJ - TWO_PI) <= tol:
        return Classification(GLOBAL_BOUNDARY, m, "boundary: |J| = int|Im u0| = 2pi (asymptotic profile)")
    if absJ <= TWO_PI - tol and aJ < TWO_PI - tol:
        return Classification(GLOBAL_DECAY, m, "sector: int|Im u0| <= 2pi, |J| < 2pi (global decay)")
    if aJ > TWO_PI + tol:
        k = excluded_index(J, tol)
        if k is None:
            return Classification(BLOW_UP, m, "continuity: |J| > 2pi, J != 2pi + 4k pi (blow-up)")
        return Classification(INDETERMINATE, m, f"excluded: J = 2pi + 4k pi with k = {k}")
    return Classification(INDETERMINATE, m, "no rule applies")


def classify(s: Scenario, tol=TOL) -> Classification:
    s.require_compact()
    return classify_masses(masses(s), tol)


def finite_singularity_check(s: Scenario, tol=TOL) -> bool:
    """True when J is not an odd multiple of 2 pi (J = 0 included)."""
    s.require_compact()
    return excluded_index(s.total_mass.imag, tol) is None


@dataclass(frozen=True)
class SweepPoint:
    lam: float
    classification: Classification
    first_blowup_time: float | None


@dataclass(frozen=True)
class SweepResult:
    points: list
    lambda_star: float | None


def crossing_lambda(base: Scenario, direction: Scenario, target=TWO_PI):
    """lambda with J(base + lambda*direction) = target; J is affine in lambda."""
    Jd = direction.total_mass.imag
    if Jd == 0:
        raise ValueError("direction has zero imaginary mass")
    return (target - base.total_mass.imag) / Jd


def basin_boundary_sweep(base: Scenario, direction: Scenario, lam_range, steps,
                         blowup_time=None, jobs=1):
    """Classify base + lambda*direction on a uniform lambda grid.

    ``blowup_time(scenario) -> float | None`` is called for blow-up verdicts
    (normally a zerofinder search); it is skipped when None.
    """
    lo, hi = lam_range
    lams = np.linspace(lo, hi, int(steps))
    lam_star = crossing_lambda(base, direction)
    # the +2pi crossing may lie outside the grid; also try -2pi
    if not lo <= lam_star <= hi:
        alt = crossing_lambda(base, direction, -TWO_PI)
        lam_star = alt if lo <= alt <= hi else None

    def one(lam):
        s = base + direction.scaled(float(lam))
        c = classify(s)
        tb = blowup_time(s) if (blowup_time is not None and c.verdict == BLOW_UP) else None
        return SweepPoint(float(lam), c, tb)

    if jobs and jobs > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            pts = list(ex.map(one, lams))
    else:
        pts = [one(l) for l in lams]
    return SweepResult(pts, lam_star)
