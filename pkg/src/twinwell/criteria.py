"""Two-site spin correlations: inference variances, entanglement and
EPR-steering criteria with optimized measurement angle and gains.

Two assembly routes are provided for the beam-splitter pipeline.  The
default expands J_C ∓ J_D into the sum/difference operators

    P^Z = J_A^Z + J_B^Z,                      P^X = J_A^X + J_B^X,
    K^Z = (i/2)(a2†b2 − b2†a2 − a1†b1 + b1†a1),
    K^X = (i/2)[e^{iΔθ}(a2†b1 − b2†a1) + e^{-iΔθ}(a1†b2 − b1†a2)],

so that J_C^θ − g J_D^θ = g₋ P^θ + g₊ K^θ with g± = (1 ± g)/2.  The
"direct" route builds the post-splitter spin operators from the c/d mode
transform and expands fourth-order moments without the regrouping; the
two must agree and are cross-checked in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateReferenceError
from .operators import SITE_A, SITE_B, SITE_C, SITE_D, NormalPoly, raising_bilinear, spin_operators
from .spins import delta_theta_from, phase_factor_from, scalar_of

_TINY = 1e-300


@dataclass(frozen=True)
class GainPair:
    """Inference gains minimizing var(J_C^θ − g J_D^θ) and var(J_C^θ' + g' J_D^θ')."""

    g: float
    g_prime: float


@dataclass(frozen=True)
class JointSpinMoments:
    """Second moments of the site-pair spins at angle θ (and θ + π/2).

    Fields may be scalars or arrays over sub-ensembles (first entry =
    merged ensemble), mirroring SpinMoments.
    """

    theta: float
    delta_theta: float
    mean_JY_C: float
    mean_JY_D: float
    var_minus_theta: float
    var_plus_theta: float
    var_minus_perp: float
    var_plus_perp: float
    cov_theta: float
    cov_perp: float
    var_JC_theta: float
    var_JC_perp: float
    var_JD_theta: float
    var_JD_perp: float

    def merged(self) -> "JointSpinMoments":
        take = lambda v: float(np.asarray(v).flat[0])
        return JointSpinMoments(
            self.theta,
            self.delta_theta,
            *[
                take(getattr(self, f))
                for f in (
                    "mean_JY_C",
                    "mean_JY_D",
                    "var_minus_theta",
                    "var_plus_theta",
                    "var_minus_perp",
                    "var_plus_perp",
                    "cov_theta",
                    "cov_perp",
                    "var_JC_theta",
                    "var_JC_perp",
                    "var_JD_theta",
                    "var_JD_perp",
                )
            ],
        )


@dataclass(frozen=True)
class CriteriaResult:
    """All per-tau outputs of the joint-criteria pipeline.

    E_product < 1 signals entanglement (< 0.5, EPR); E_EPR_product < 1
    signals steering; duan_sum < 0 is the sum-criterion violation.
    """

    tau: float
    theta_opt: float
    delta_theta: float
    S_minus: float
    S_plus: float
    E_product: float
    E_EPR_product: float
    g: float
    g_prime: float
    duan_sum: float
    joint: JointSpinMoments


def _kz_poly() -> NormalPoly:
    i2 = 0.5j
    return NormalPoly(
        {
            (0, 1, 0, 0, 0, 0, 0, 1): i2,  # a2† b2
            (0, 0, 0, 1, 0, 1, 0, 0): -i2,  # b2† a2
            (1, 0, 0, 0, 0, 0, 1, 0): -i2,  # a1† b1
            (0, 0, 1, 0, 1, 0, 0, 0): i2,  # b1† a1
        }
    )


def _kx_poly(pf: complex) -> NormalPoly:
    i2 = 0.5j
    pfc = pf.conjugate()
    return NormalPoly(
        {
            (0, 1, 0, 0, 0, 0, 1, 0): i2 * pf,  # a2† b1
            (0, 0, 0, 1, 1, 0, 0, 0): -i2 * pf,  # b2† a1
            (1, 0, 0, 0, 0, 0, 0, 1): i2 * pfc,  # a1† b2
            (0, 0, 1, 0, 0, 1, 0, 0): -i2 * pfc,  # b1† a2
        }
    )


def _basis_ops(beam_splitter: bool, pf: complex, route: str):
    """Four Hermitian basis operators and the combination mode.

    mode "cd": basis = (J_C^Z, J_C^X, J_D^Z, J_D^X) directly.
    mode "pk": basis = (P^Z, P^X, K^Z, K^X) sum/difference regrouping.
    """
    if beam_splitter and route == "decomposition":
        jax_, _, jaz = spin_operators(SITE_A, pf)
        jbx, _, jbz = spin_operators(SITE_B, pf)
        return [jaz + jbz, jax_ + jbx, _kz_poly(), _kx_poly(pf)], "pk"
    if route not in ("decomposition", "direct"):
        raise ValueError(f"unknown route {route!r}")
    site_c, site_d = (SITE_C, SITE_D) if beam_splitter else (SITE_A, SITE_B)
    jcx, _, jcz = spin_operators(site_c, pf)
    jdx, _, jdz = spin_operators(site_d, pf)
    return [jcz, jcx, jdz, jdx], "cd"


def _stats(eval_fn, ops):
    """Means and symmetrized covariance matrix of the four basis ops."""
    means = [np.real(eval_fn(op)) for op in ops]
    V = [[None] * 4 for _ in range(4)]
    for i in range(4):
        for j in range(i, 4):
            sym = 0.5 * (ops[i] * ops[j] + ops[j] * ops[i])
            V[i][j] = V[j][i] = np.real(eval_fn(sym)) - means[i] * means[j]
    return means, V


def _quad(V, i, j, c, s):
    """cov(c·Z_i + s·X_i, c·Z_j + s·X_j) for block offsets i, j in {0, 2}."""
    return (
        c * c * V[i][j]
        + s * s * V[i + 1][j + 1]
        + c * s * (V[i][j + 1] + V[i + 1][j])
    )


def _combos(mode: str, V, theta):
    c = np.cos(theta)
    s = np.sin(theta)
    if mode == "pk":
        wpp = _quad(V, 0, 0, c, s)
        wkk = _quad(V, 2, 2, c, s)
        wpk = _quad(V, 0, 2, c, s)
        var_c = 0.25 * (wpp + wkk + 2.0 * wpk)
        var_d = 0.25 * (wpp + wkk - 2.0 * wpk)
        cov = 0.25 * (wpp - wkk)
        v_minus = wkk
        v_plus = wpp
    else:
        var_c = _quad(V, 0, 0, c, s)
        var_d = _quad(V, 2, 2, c, s)
        cov = _quad(V, 0, 2, c, s)
        v_minus = var_c + var_d - 2.0 * cov
        v_plus = var_c + var_d + 2.0 * cov
    return {
        "var_C": var_c,
        "var_D": var_d,
        "cov": cov,
        "v_minus": v_minus,
        "v_plus": v_plus,
    }


def _merged_V(V):
    take = lambda v: float(np.asarray(v).flat[0])
    return [[take(V[i][j]) for j in range(4)] for i in range(4)]


def _objective(mode: str, V, theta, objective: str):
    a = _combos(mode, V, theta)
    b = _combos(mode, V, theta + 0.5 * math.pi)
    if objective == "epr":
        v1 = a["var_C"] - a["cov"] ** 2 / np.maximum(a["var_D"], _TINY)
        v2 = b["var_C"] - b["cov"] ** 2 / np.maximum(b["var_D"], _TINY)
        return v1 * v2
    return a["v_minus"] * b["v_plus"]


def optimal_theta(V, mode: str, objective: str = "product", n_scan: int = 720) -> float:
    """Angle minimizing the joint inference-variance product.

    Dense scan over (-pi/2, pi/2) followed by golden-section refinement
    of the winning bracket (the objective is smooth and pi-periodic).
    """
    grid = np.linspace(-0.5 * math.pi, 0.5 * math.pi, n_scan, endpoint=False)
    vals = _objective(mode, V, grid, objective)
    i = int(np.argmin(vals))
    step = math.pi / n_scan
    a, b = grid[i] - step, grid[i] + step
    inv_phi = 0.5 * (math.sqrt(5.0) - 1.0)
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc = float(_objective(mode, V, c, objective))
    fd = float(_objective(mode, V, d, objective))
    for _ in range(64):
        if b - a < 1e-12:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = float(_objective(mode, V, c, objective))
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = float(_objective(mode, V, d, objective))
    theta = 0.5 * (a + b)
    if theta <= -0.5 * math.pi:
        theta += math.pi
    elif theta > 0.5 * math.pi:
        theta -= math.pi
    return float(theta)


def joint_moments(
    eval_fn,
    theta: float | None = None,
    beam_splitter: bool = True,
    route: str = "decomposition",
    objective: str = "product",
) -> JointSpinMoments:
    """Joint spin moments at angle θ (optimized over the merged ensemble
    when not given)."""
    site_c, site_d = (SITE_C, SITE_D) if beam_splitter else (SITE_A, SITE_B)
    w_c = eval_fn(raising_bilinear(site_c))
    w_d = eval_fn(raising_bilinear(site_d))
    pf = phase_factor_from(scalar_of(w_c))
    ops, mode = _basis_ops(beam_splitter, pf, route)
    _, V = _stats(eval_fn, ops)
    if theta is None:
        theta = optimal_theta(_merged_V(V), mode, objective)
    at = _combos(mode, V, theta)
    ap = _combos(mode, V, theta + 0.5 * math.pi)
    return JointSpinMoments(
        theta=float(theta),
        delta_theta=delta_theta_from(scalar_of(w_c)),
        mean_JY_C=np.imag(pf * w_c),
        mean_JY_D=np.imag(pf * w_d),
        var_minus_theta=at["v_minus"],
        var_plus_theta=at["v_plus"],
        var_minus_perp=ap["v_minus"],
        var_plus_perp=ap["v_plus"],
        cov_theta=at["cov"],
        cov_perp=ap["cov"],
        var_JC_theta=at["var_C"],
        var_JC_perp=ap["var_C"],
        var_JD_theta=at["var_D"],
        var_JD_perp=ap["var_D"],
    )


def _n0(j: JointSpinMoments):
    return 0.5 * (np.abs(j.mean_JY_C) + np.abs(j.mean_JY_D))


def e_product(j: JointSpinMoments):
    """sqrt(Δ²(J_C^θ−J_D^θ)·Δ²(J_C^θ'+J_D^θ')) over the two-site shot noise."""
    n0 = _n0(j)
    if np.ndim(n0) == 0 and n0 == 0.0:
        raise DegenerateReferenceError("zero mean transverse spin at both sites")
    num = np.sqrt(np.maximum(j.var_minus_theta, 0.0) * np.maximum(j.var_plus_perp, 0.0))
    return num / n0


def optimal_gains(j: JointSpinMoments) -> GainPair:
    """Gains minimizing the two inference variances (merged ensemble)."""
    m = j.merged()
    if m.var_JD_theta <= 0.0 or m.var_JD_perp <= 0.0:
        raise DegenerateReferenceError("zero variance at the inferring site")
    return GainPair(
        m.cov_theta / m.var_JD_theta,
        -m.cov_perp / m.var_JD_perp,
    )


def inference_variances(j: JointSpinMoments, gains: GainPair):
    """Δ²(J_C^θ − g J_D^θ) and Δ²(J_C^θ' + g' J_D^θ')."""
    g = gains.g
    gp = gains.g_prime
    v1 = j.var_JC_theta - 2.0 * g * j.cov_theta + g * g * j.var_JD_theta
    v2 = j.var_JC_perp + 2.0 * gp * j.cov_perp + gp * gp * j.var_JD_perp
    return v1, v2


def e_epr_product(j: JointSpinMoments, gains: GainPair):
    """Gain-optimized steering product over the single-site reference |<J_C^Y>|/2."""
    ref = 0.5 * np.abs(j.mean_JY_C)
    if np.ndim(ref) == 0 and ref == 0.0:
        raise DegenerateReferenceError("zero mean transverse spin at site C")
    v1, v2 = inference_variances(j, gains)
    return np.sqrt(np.maximum(v1, 0.0) * np.maximum(v2, 0.0)) / ref


def duan_sum_spin(j: JointSpinMoments):
    """LHS − RHS of the sum criterion in the rotated frame; < 0 ⇒ entangled."""
    return (
        j.var_minus_theta + j.var_plus_perp - (np.abs(j.mean_JY_C) + np.abs(j.mean_JY_D))
    )


def evaluate_criteria(
    eval_fn,
    tau: float,
    beam_splitter: bool = True,
    theta: float | None = None,
    objective: str = "product",
    route: str = "decomposition",
) -> CriteriaResult:
    """Full per-tau criteria bundle (angle, gains, S∓, products, sum)."""
    j = joint_moments(eval_fn, theta, beam_splitter, route, objective)
    gains = optimal_gains(j)
    n0 = _n0(j)
    s_minus = j.var_minus_theta / n0
    s_plus = j.var_plus_perp / n0
    return CriteriaResult(
        tau=float(tau),
        theta_opt=j.theta,
        delta_theta=j.delta_theta,
        S_minus=s_minus,
        S_plus=s_plus,
        E_product=e_product(j),
        E_EPR_product=e_epr_product(j, gains),
        g=gains.g,
        g_prime=gains.g_prime,
        duan_sum=duan_sum_spin(j),
        joint=j,
    )
