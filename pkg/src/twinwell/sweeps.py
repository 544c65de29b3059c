"""Sweep pipelines shared by the CLI.

Three pipelines mirror the three experiments:

  squeeze   nonlinear evolution only, single-site squeezing (exact engine)
  two-step  nonlinear evolution, then the tunneling-pulse beam splitter,
            then joint criteria (exact or stochastic engine)
  dynamic   simultaneous tunneling + nonlinearity (+ losses), stochastic
            engine, criteria with or without a final beam splitter

Every pipeline emits the same fixed row schema; standard-error columns
are filled for stochastic runs only (sub-ensemble spread with angle and
gains frozen at the merged-ensemble optimum).
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from . import __version__
from .config import RunConfig, config_hash
from .criteria import evaluate_criteria
from .errors import ConfigError
from .kerr import KerrMomentSource
from .spins import optimal_angle, spin_moments, squeezing
from .wigner import run_ensemble

CSV_COLUMNS = (
    "tau",
    "theta_opt",
    "delta_theta",
    "S_local",
    "S_minus",
    "S_plus",
    "E_product",
    "E_EPR_product",
    "g",
    "g_prime",
    "duan_sum",
    "se_S_local",
    "se_S_minus",
    "se_S_plus",
    "se_E_product",
    "se_E_EPR_product",
    "se_duan_sum",
)


@dataclass
class SweepRow:
    tau: float
    theta_opt: float | None = None
    delta_theta: float | None = None
    S_local: float | None = None
    S_minus: float | None = None
    S_plus: float | None = None
    E_product: float | None = None
    E_EPR_product: float | None = None
    g: float | None = None
    g_prime: float | None = None
    duan_sum: float | None = None
    se_S_local: float | None = None
    se_S_minus: float | None = None
    se_S_plus: float | None = None
    se_E_product: float | None = None
    se_E_EPR_product: float | None = None
    se_duan_sum: float | None = None


def _point(x) -> float:
    return float(np.asarray(x).flat[0])


def _se(x) -> float | None:
    arr = np.asarray(x)
    if arr.ndim == 0 or arr.size <= 2:
        return None
    chunks = arr.ravel()[1:]
    return float(chunks.std(ddof=1) / math.sqrt(chunks.size))


def _local_squeezing(eval_fn):
    """(S_local, theta_local) at the site-A optimum of the merged ensemble."""
    m = spin_moments(eval_fn)
    theta = optimal_angle(m.merged())
    return squeezing(m, theta), theta


def criteria_row(eval_fn, tau: float, sweep, beam_splitter: bool = True) -> SweepRow:
    s_local, _ = _local_squeezing(eval_fn)
    r = evaluate_criteria(
        eval_fn,
        tau,
        beam_splitter=beam_splitter,
        theta=sweep.fixed_theta,
        objective=sweep.theta_objective,
    )
    return SweepRow(
        tau=tau,
        theta_opt=r.theta_opt,
        delta_theta=r.delta_theta,
        S_local=_point(s_local),
        S_minus=_point(r.S_minus),
        S_plus=_point(r.S_plus),
        E_product=_point(r.E_product),
        E_EPR_product=_point(r.E_EPR_product),
        g=r.g,
        g_prime=r.g_prime,
        duan_sum=_point(r.duan_sum),
        se_S_local=_se(s_local),
        se_S_minus=_se(r.S_minus),
        se_S_plus=_se(r.S_plus),
        se_E_product=_se(r.E_product),
        se_E_EPR_product=_se(r.E_EPR_product),
        se_duan_sum=_se(r.duan_sum),
    )


def _require_no_tunneling(cfg: RunConfig, what: str) -> None:
    if cfg.couplings.tunneling:
        raise ConfigError(
            [f"couplings.kappa: {what} requires zero tunneling (got "
             f"kappa1={cfg.couplings.kappa1}, kappa2={cfg.couplings.kappa2})"]
        )


def squeeze_sweep(cfg: RunConfig) -> list[SweepRow]:
    """Single-site squeezing vs tau (exact engine, no beam splitter)."""
    _require_no_tunneling(cfg, "the exact engine")
    rows = []
    for tau in cfg.sweep.taus:
        ev = KerrMomentSource(cfg.couplings, cfg.initial, tau).evaluator()
        m = spin_moments(ev)
        theta = optimal_angle(m)
        rows.append(
            SweepRow(
                tau=tau,
                theta_opt=theta,
                delta_theta=m.delta_theta,
                S_local=float(squeezing(m, theta)),
            )
        )
    return rows


def two_step_sweep(cfg: RunConfig, engine: str = "exact") -> list[SweepRow]:
    """Nonlinear evolution, beam splitter, joint criteria."""
    _require_no_tunneling(cfg, "the two-step pipeline")
    if engine == "exact":
        if cfg.losses.enabled:
            raise ConfigError(["losses: the exact engine supports lossless dynamics only"])
        rows = []
        for tau in cfg.sweep.taus:
            ev = KerrMomentSource(cfg.couplings, cfg.initial, tau).evaluator()
            rows.append(criteria_row(ev, tau, cfg.sweep, beam_splitter=True))
        return rows
    if engine != "wigner":
        raise ConfigError([f"engine: expected 'exact' or 'wigner', got {engine!r}"])
    return _wigner_rows(cfg, beam_splitter=True)


def dynamic_sweep(cfg: RunConfig, beam_splitter: bool = False) -> list[SweepRow]:
    """Simultaneous tunneling + nonlinearity + losses (stochastic engine)."""
    return _wigner_rows(cfg, beam_splitter=beam_splitter)


def _wigner_rows(cfg: RunConfig, beam_splitter: bool) -> list[SweepRow]:
    run = run_ensemble(cfg.couplings, cfg.losses, cfg.initial, cfg.sweep.taus, cfg.wigner)
    return [
        criteria_row(run.source(i), tau, cfg.sweep, beam_splitter=beam_splitter)
        for i, tau in enumerate(run.taus)
    ]


def min_over_tau(taus, values, reevaluate=None):
    """Grid minimum with local parabolic refinement.

    `reevaluate(tau)` recomputes the objective exactly at the parabola
    vertex (used by the exact engine); stochastic curves keep the grid
    value.  Returns (tau_min, value_min).
    """
    taus = np.asarray(taus, dtype=float)
    values = np.asarray(values, dtype=float)
    i = int(np.argmin(values))
    best = (float(taus[i]), float(values[i]))
    if 0 < i < len(taus) - 1:
        t0, t1, t2 = taus[i - 1 : i + 2]
        v0, v1, v2 = values[i - 1 : i + 2]
        denom = (t1 - t0) * (v1 - v2) - (t1 - t2) * (v1 - v0)
        if denom != 0.0:
            tv = t1 - 0.5 * ((t1 - t0) ** 2 * (v1 - v2) - (t1 - t2) ** 2 * (v1 - v0)) / denom
            if t0 < tv < t2 and reevaluate is not None:
                vv = float(reevaluate(float(tv)))
                if vv < best[1]:
                    best = (float(tv), vv)
    return best


def _fmt(v) -> str:
    if v is None:
        return ""
    return f"{v:.12g}"


def write_csv(rows, meta: dict, stream=None) -> str:
    """Fixed-schema CSV with a '#' header block (config hash, seed, version)."""
    buf = io.StringIO()
    buf.write(f"# twinwell {__version__}\n")
    for key, value in meta.items():
        buf.write(f"# {key}: {value}\n")
    buf.write("# columns: " + ",".join(CSV_COLUMNS) + "\n")
    buf.write(",".join(CSV_COLUMNS) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(getattr(row, c)) for c in CSV_COLUMNS) + "\n")
    text = buf.getvalue()
    if stream is not None:
        stream.write(text)
    return text


def run_meta(cfg: RunConfig, command: str, engine: str, beam_splitter: bool | None) -> dict:
    meta = {
        "command": command,
        "engine": engine,
        "seed": cfg.wigner.seed,
        "config_sha256": config_hash(cfg),
    }
    if beam_splitter is not None:
        meta["beam_splitter"] = "on" if beam_splitter else "off"
    return meta


def validation_report(cfg: RunConfig, n_traj: int | None = None):
    """Oracle suites: closed form vs Fock basis, stochastic vs exact.

    Returns (lines, ok).  Kept deliberately small so it runs in seconds
    at default settings.
    """
    from .config import InitialState, preset_couplings
    from .kerr import fock_oracle_moment, kerr_moment
    from .operators import ModeMonomial

    lines = []
    ok = True

    ratios = preset_couplings("B9p116G", 1.0)
    small = InitialState(N_A=8.0, N_B=8.0)
    rng = np.random.default_rng(2024)
    worst = 0.0
    monos = [
        (p1, p2, q1, q2)
        for p1 in range(5)
        for p2 in range(5)
        for q1 in range(5)
        for q2 in range(5)
        if 0 < p1 + p2 + q1 + q2 <= 4
    ]
    for tau in rng.uniform(0.01, 0.2, 5):
        for m in monos:
            mono = ModeMonomial.site_a(*m)
            a = kerr_moment(mono, ratios, tau, small)
            b = fock_oracle_moment(mono, ratios, tau, small, cutoff=40)
            worst = max(worst, abs(a - b) / (abs(b) + 1e-12))
    passed = worst < 1e-8
    ok &= passed
    lines.append(
        f"[{'PASS' if passed else 'FAIL'}] closed form vs Fock oracle: "
        f"max relative error {worst:.3e} (tolerance 1e-8)"
    )

    n_traj = n_traj or min(cfg.wigner.n_traj, 4000)
    n_traj -= n_traj % cfg.wigner.chunk_size
    n_traj = max(n_traj, 2 * cfg.wigner.chunk_size)
    taus = tuple(np.linspace(0.0, 2.0, 5))
    if cfg.couplings.tunneling or cfg.losses.enabled:
        lines.append("[SKIP] stochastic vs exact: requires zero tunneling and losses")
        run = None
    else:
        run = run_ensemble(cfg.couplings, cfg.losses, cfg.initial, taus, cfg.wigner, n_traj=n_traj)
    if run is not None:
        worst_dev = 0.0
        for i, tau in enumerate(taus):
            src = run.source(i)
            rw = evaluate_criteria(src, tau)
            ex = KerrMomentSource(cfg.couplings, cfg.initial, tau).evaluator()
            re_ = evaluate_criteria(ex, tau, theta=rw.theta_opt)
            arr = np.asarray(rw.E_product)
            se = arr[1:].std(ddof=1) / math.sqrt(arr.size - 1)
            if se > 0:
                worst_dev = max(worst_dev, abs(arr[0] - re_.E_product) / se)
        passed = worst_dev < 4.0
        ok &= passed
        lines.append(
            f"[{'PASS' if passed else 'FAIL'}] stochastic vs exact (n_traj={n_traj}): "
            f"max |E_product| deviation {worst_dev:.2f} standard errors (limit 4)"
        )
    return lines, bool(ok)
