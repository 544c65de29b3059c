"""Schwinger-spin moments, optimal quadrature angle and squeezing for one site.

The mode-phase convention Δθ = π/2 − arg<a2† a1> makes <J^X> = 0 and
<J^Y> = |<a2† a1>| ≥ 0 at every time; the squeezing reference is then
|<J^Y>|/2.  The phase factor e^{iΔθ} is computed as i·conj(w)/|w| rather
than through trigonometric functions of arg(w), which keeps the tau = 0
shot-noise baselines exact to machine precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateReferenceError
from .operators import SITE_A, SITE_B, raising_bilinear, spin_operators


def scalar_of(x) -> complex:
    """Collapse an evaluator result to its ensemble value.

    Chunked (stochastic) evaluators return arrays whose first entry is
    the merged-ensemble value; exact evaluators return plain scalars.
    """
    if isinstance(x, np.ndarray):
        return complex(x.flat[0])
    return complex(x)


def phase_factor_from(w) -> complex:
    """e^{iΔθ} for Δθ = π/2 − arg(w), formed as i·conj(w)/|w|."""
    w = complex(w)
    aw = abs(w)
    if aw == 0.0:
        raise DegenerateReferenceError("zero transverse coherence <a2† a1>")
    return 1j * w.conjugate() / aw


def delta_theta_from(w) -> float:
    w = complex(w)
    return 0.5 * math.pi - math.atan2(w.imag, w.real)


@dataclass(frozen=True)
class SpinMoments:
    """First and second moments of one site's spin triple.

    Fields may be scalars (exact engine) or arrays over sub-ensembles
    (stochastic engine, first entry = merged ensemble).
    """

    mean_JX: float
    mean_JY: float
    mean_JZ: float
    var_JZ: float
    var_JX: float
    cov_ZX: float
    delta_theta: float = float("nan")

    def merged(self) -> "SpinMoments":
        take = lambda v: float(np.asarray(v).flat[0])
        return SpinMoments(
            take(self.mean_JX),
            take(self.mean_JY),
            take(self.mean_JZ),
            take(self.var_JZ),
            take(self.var_JX),
            take(self.cov_ZX),
            self.delta_theta,
        )


def spin_moments(eval_fn, site=SITE_A) -> SpinMoments:
    """Assemble spin moments from a monomial-expectation evaluator.

    `eval_fn` maps a NormalPoly to its expectation (scalar or chunked
    array).  The phase convention is fixed from the merged ensemble.
    """
    w_all = eval_fn(raising_bilinear(site))
    pf = phase_factor_from(scalar_of(w_all))
    jx, jy, jz = spin_operators(site, pf)

    s_mean = pf * w_all  # <S> with the phase applied; Im -> J^Y, Re -> J^X
    mean_jx = np.real(s_mean)
    mean_jy = np.imag(s_mean)
    mean_jz = np.real(eval_fn(jz))
    var_jz = np.real(eval_fn(jz * jz)) - mean_jz * mean_jz
    var_jx = np.real(eval_fn(jx * jx)) - mean_jx * mean_jx
    cov_poly = 0.5 * (jz * jx + jx * jz)
    cov_zx = np.real(eval_fn(cov_poly)) - mean_jz * mean_jx
    return SpinMoments(
        mean_jx,
        mean_jy,
        mean_jz,
        var_jz,
        var_jx,
        cov_zx,
        delta_theta_from(scalar_of(w_all)),
    )


def rotated_variance(m: SpinMoments, theta) -> float:
    """Variance of J^θ = cosθ J^Z + sinθ J^X."""
    c = np.cos(theta)
    s = np.sin(theta)
    return c * c * m.var_JZ + s * s * m.var_JX + 2.0 * s * c * m.cov_ZX


def _fold_angle(theta: float) -> float:
    """Fold into (-pi/2, pi/2]."""
    theta = math.fmod(theta, math.pi)
    if theta <= -0.5 * math.pi:
        theta += math.pi
    elif theta > 0.5 * math.pi:
        theta -= math.pi
    return theta


def optimal_angle(m: SpinMoments) -> float:
    """Angle in (-pi/2, pi/2] minimizing `rotated_variance`.

    The stationarity condition tan(2θ) = 2 cov / (varZ − varX) yields a
    minimum/maximum pair; both candidates are compared explicitly.  The
    fully degenerate case returns 0, and exact ties go to the smaller |θ|.
    """
    num = 2.0 * m.cov_ZX
    den = m.var_JZ - m.var_JX
    if num == 0.0 and den == 0.0:
        return 0.0
    t0 = _fold_angle(0.5 * math.atan2(num, den))
    t1 = _fold_angle(t0 + 0.5 * math.pi)
    v0 = rotated_variance(m, t0)
    v1 = rotated_variance(m, t1)
    if v0 == v1:
        return t0 if abs(t0) <= abs(t1) else t1
    return t0 if v0 < v1 else t1


def squeezing(m: SpinMoments, theta) -> float:
    """Rotated variance over the Heisenberg reference |<J^Y>|/2; < 1 squeezed."""
    ref = 0.5 * np.abs(m.mean_JY)
    if np.ndim(ref) == 0 and ref == 0.0:
        raise DegenerateReferenceError("mean transverse spin <J^Y> is zero")
    return rotated_variance(m, theta) / ref


__all__ = [
    "SpinMoments",
    "spin_moments",
    "rotated_variance",
    "optimal_angle",
    "squeezing",
    "phase_factor_from",
    "delta_theta_from",
    "scalar_of",
    "SITE_A",
    "SITE_B",
]
