"""Log-log slope fits, exponential envelopes and three-valued verdicts."""
from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

SLOPE_TOL = 0.3


def fit_loglog(x, y):
    """Least-squares slope of log(y) against log(x) and the RMS residual."""
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.asarray(y, dtype=float))
    A = np.vstack([lx, np.ones_like(lx)]).T
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - A @ coef
    return float(coef[0]), float(np.sqrt(np.mean(resid**2)))


def slope_verdict(slope, exponent, tol=SLOPE_TOL):
    """PASS if slope >= exponent - tol, MARGINAL within twice the tolerance."""
    if slope is None or not np.isfinite(slope):
        return "FAIL"
    if slope >= exponent - tol:
        return "PASS"
    if slope >= exponent - 2 * tol:
        return "MARGINAL"
    return "FAIL"


def worst(verdicts):
    order = {"PASS": 0, "MARGINAL": 1, "FAIL": 2}
    vs = list(verdicts)
    if not vs:
        return "PASS"
    return max(vs, key=lambda v: order.get(v, 2))


@dataclass
class EnvelopeFit:
    """Fit of q(t) <= q(0) exp((rate + margin) t).

    ``rate`` is the least-squares slope through the origin of log(q/q0);
    ``residual`` is the RMS spread of the secant rates log(q/q0)/t about it.
    """

    rate: float
    residual: float
    margin: float
    holds: bool
    degenerate: bool
    times: list
    values: list

    @property
    def verdict(self):
        if self.degenerate:
            return "FAIL"
        return "PASS" if self.holds else "FAIL"

    def to_dict(self):
        d = asdict(self)
        d["verdict"] = self.verdict
        return d


def exponential_envelope(times, values, min_points=8, floor=1e-300):
    t = np.asarray(times, dtype=float)
    q = np.asarray(values, dtype=float)
    if t.size < min_points:
        raise ValueError(f"need at least {min_points} snapshots, got {t.size}")
    q0 = q[0]
    if q0 <= floor:
        degenerate = bool(np.any(q > floor))
        return EnvelopeFit(0.0, 0.0, 0.0, not degenerate, degenerate, t.tolist(), q.tolist())
    y = np.log(np.maximum(q, floor) / q0)
    later = t > 0
    tt, yy = t[later], y[later]
    rate = float(np.dot(tt, yy) / np.dot(tt, tt))
    secants = yy / tt
    residual = float(np.sqrt(np.mean((secants - rate) ** 2)))
    margin = 2.0 * residual
    # relative slack of a few ulps for conserved quantities
    bound = (rate + margin) * tt + 1e-12
    holds = bool(np.all(yy <= bound))
    return EnvelopeFit(rate, residual, margin, holds, False, t.tolist(), q.tolist())
