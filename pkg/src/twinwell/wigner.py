"""Truncated-Wigner stochastic engine for the four-mode system.

Phase-space amplitudes z = (α1, β1, α2, β2) are sampled from the initial
coherent-state Wigner distribution (half-quantum width 1/2 per mode) and
integrated through

    dz = a dτ + B dZ,      a = -i a_drift - a_loss,

with the drift and diffusion of the dimensionless master equation.  The
complex Wiener increments satisfy <dZ* dZ> = dτ, <dZ dZ> = 0.  Raw path
averages estimate symmetric-ordered moments; `symmetric_to_normal`
converts them to normal order per mode via the s-ordering expansion

    a†^p a^q = sum_k k! C(p,k) C(q,k) (-1/2)^k {a†^(p-k) a^(q-k)}_sym.

Trajectories are organized in fixed-size chunks.  Chunk c draws from its
own Philox stream keyed by (seed, chunk_offset + c), so results are
bit-reproducible, independent of scheduling, and half-ensembles merge
exactly into full ones.

Linear-loss placement is configurable (`linear_loss_mode`):

  "symmetric"  loss at rate γ1 on all four modes (default),
  "printed"    γ1 on (α1, β1), the drift/diffusion layout as printed in
               the source derivation (4x6 diffusion matrix),
  "operators"  γ1 on (α2, β1), the literal loss-operator pair.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .config import InitialState, LossRates, PhysicalCouplings, SimConfig
from .errors import ConfigError, DivergenceError
from .operators import ModeMonomial

# ---------------------------------------------------------------------------
# monomial basis: all (p, q) exponent vectors with total order <= 4

MAX_ORDER = 4
# z-vector columns are (a1, b1, a2, b2); monomial mode order is (a1, a2, b1, b2)
MODE_TO_ZCOL = (0, 2, 1, 3)


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest


def _gen_basis():
    keys = []
    for order in range(MAX_ORDER + 1):
        keys.extend(sorted(_compositions(order, 8)))
    index = {k: i for i, k in enumerate(keys)}
    plan = []  # (column, parent column, variable column in the 8-var table)
    for i, k in enumerate(keys):
        if sum(k) == 0:
            continue
        j = next(pos for pos, e in enumerate(k) if e)
        parent = list(k)
        parent[j] -= 1
        plan.append((i, index[tuple(parent)], j))
    return tuple(keys), index, tuple(plan)


BASIS_KEYS, BASIS_INDEX, _BUILD_PLAN = _gen_basis()
NBASIS = len(BASIS_KEYS)


def _cahill_matrix() -> np.ndarray:
    """M with normal_moments = M @ symmetric_moments (per-mode expansion)."""
    m = np.zeros((NBASIS, NBASIS))
    for i, key in enumerate(BASIS_KEYS):
        p, q = key[:4], key[4:]
        ranges = [range(min(p[j], q[j]) + 1) for j in range(4)]
        for kk in itertools.product(*ranges):
            coeff = 1.0
            for j in range(4):
                if kk[j]:
                    coeff *= (
                        math.comb(p[j], kk[j])
                        * math.comb(q[j], kk[j])
                        * math.factorial(kk[j])
                        * (-0.5) ** kk[j]
                    )
            tgt = tuple(p[j] - kk[j] for j in range(4)) + tuple(
                q[j] - kk[j] for j in range(4)
            )
            m[i, BASIS_INDEX[tgt]] += coeff
    return m


CAHILL = _cahill_matrix()


def monomial_columns(z: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
    """(n, NBASIS) table of conj(z)^p z^q monomial values for each trajectory."""
    n = z.shape[0]
    if out is None:
        out = np.empty((n, NBASIS), dtype=complex)
    var8 = np.empty((n, 8), dtype=complex)
    for m, col in enumerate(MODE_TO_ZCOL):
        var8[:, m] = np.conj(z[:, col])
        var8[:, 4 + m] = z[:, col]
    out[:, 0] = 1.0
    for col, parent, var in _BUILD_PLAN:
        np.multiply(out[:, parent], var8[:, var], out=out[:, col])
    return out


# ---------------------------------------------------------------------------
# accumulator


@dataclass
class ChunkStats:
    count: int
    sums: np.ndarray  # (NBASIS,) complex
    sumsq: np.ndarray  # (NBASIS,) float, sums of |monomial|^2


class MomentAccumulator:
    """Mergeable per-chunk sums of phase-space monomials up to order 4.

    Merging is exact: chunks keep their identity, and reductions always
    run in chunk-id order, so any grouping of sub-ensembles yields
    bit-identical results.
    """

    def __init__(self, chunks: dict[int, ChunkStats] | None = None):
        self.chunks: dict[int, ChunkStats] = dict(chunks) if chunks else {}

    def add_chunk(self, chunk_id: int, count: int, sums, sumsq) -> None:
        if chunk_id in self.chunks:
            raise ValueError(f"duplicate chunk id {chunk_id}")
        self.chunks[chunk_id] = ChunkStats(int(count), sums, sumsq)

    def merge(self, other: "MomentAccumulator") -> "MomentAccumulator":
        overlap = self.chunks.keys() & other.chunks.keys()
        if overlap:
            raise ValueError(f"cannot merge accumulators sharing chunks {sorted(overlap)}")
        out = dict(self.chunks)
        out.update(other.chunks)
        return MomentAccumulator(out)

    @property
    def count(self) -> int:
        return sum(c.count for c in self.chunks.values())

    def _ordered(self):
        return [self.chunks[k] for k in sorted(self.chunks)]

    def mean(self) -> np.ndarray:
        """(NBASIS,) symmetric-ordered moment estimates over all chunks."""
        stacked = np.vstack([c.sums for c in self._ordered()])
        return stacked.sum(axis=0) / self.count

    def chunk_means(self) -> np.ndarray:
        """(n_chunks, NBASIS), chunk-id order."""
        return np.vstack([c.sums / c.count for c in self._ordered()])

    def moment_stderr(self) -> np.ndarray:
        """Per-monomial standard error of the mean (|.|-sense)."""
        n = self.count
        sumsq = np.vstack([c.sumsq for c in self._ordered()]).sum(axis=0)
        var = np.maximum(sumsq / n - np.abs(self.mean()) ** 2, 0.0)
        return np.sqrt(var / max(n - 1, 1))


def symmetric_to_normal(acc: MomentAccumulator) -> dict:
    """Normal-ordered moment table from a symmetric-ordered accumulator."""
    normal = CAHILL @ acc.mean()
    return dict(zip(BASIS_KEYS, normal))


class WignerMomentSource:
    """Evaluator over one output time of a run.

    Calling with a NormalPoly returns an array whose first entry is the
    merged-ensemble expectation and the rest are per-chunk expectations
    (for standard errors).  Calling with a monomial key or ModeMonomial
    returns the merged normal-ordered moment.
    """

    def __init__(self, acc: MomentAccumulator):
        merged = acc.mean()
        table = np.vstack([merged[None, :], acc.chunk_means()])
        self._weyl = table
        self._normal_merged = CAHILL @ merged
        self.n_chunks = table.shape[0] - 1

    def poly_weights(self, poly) -> np.ndarray:
        w = np.zeros(NBASIS, dtype=complex)
        for key, c in poly.terms.items():
            idx = BASIS_INDEX.get(key)
            if idx is None:
                raise ValueError(f"monomial order {sum(key)} exceeds accumulated order {MAX_ORDER}")
            w[idx] += c
        return w

    def __call__(self, item):
        if isinstance(item, ModeMonomial):
            return complex(self._normal_merged[BASIS_INDEX[item.key]])
        if isinstance(item, tuple):
            return complex(self._normal_merged[BASIS_INDEX[item]])
        weyl_weights = CAHILL.T @ self.poly_weights(item)
        return self._weyl @ weyl_weights


# ---------------------------------------------------------------------------
# dynamics


def _abs2(x: np.ndarray) -> np.ndarray:
    return x.real * x.real + x.imag * x.imag


def _linear_loss_cols(mode: str):
    if mode == "symmetric":
        return (0, 1, 2, 3)
    if mode == "printed":
        return (0, 1)
    if mode == "operators":
        return (2, 1)
    raise ConfigError([f"wigner.linear_loss_mode: unknown mode {mode!r}"])


def n_noise_columns(mode: str) -> int:
    return 4 + len(_linear_loss_cols(mode))


def drift(
    z: np.ndarray,
    couplings: PhysicalCouplings,
    losses: LossRates,
    linear_loss_mode: str = "symmetric",
) -> np.ndarray:
    """Deterministic part a = -i a_drift - a_loss of the phase-space flow."""
    a1, b1, a2, b2 = z[..., 0], z[..., 1], z[..., 2], z[..., 3]
    na1, nb1, na2, nb2 = _abs2(a1), _abs2(b1), _abs2(a2), _abs2(b2)
    g11, g12, g22 = couplings.g11, couplings.g12, couplings.g22
    k1, k2 = couplings.kappa1, couplings.kappa2
    out = np.empty_like(z)
    out[..., 0] = -1j * (k1 * b1 + a1 * (g11 * na1 + g12 * na2))
    out[..., 1] = -1j * (k1 * a1 + b1 * (g11 * nb1 + g12 * nb2))
    out[..., 2] = -1j * (k2 * b2 + a2 * (g12 * na1 + g22 * na2))
    out[..., 3] = -1j * (k2 * a2 + b2 * (g12 * nb1 + g22 * nb2))
    if losses.enabled:
        g1, gm12, gm22 = losses.gamma1, losses.gamma12, losses.gamma22
        out[..., 0] -= a1 * (gm12 * na2)
        out[..., 1] -= b1 * (gm12 * nb2)
        out[..., 2] -= a2 * (gm12 * na1 + 2.0 * gm22 * na2)
        out[..., 3] -= b2 * (gm12 * nb1 + 2.0 * gm22 * nb2)
        if g1:
            for col in _linear_loss_cols(linear_loss_mode):
                out[..., col] -= g1 * z[..., col]
    return out


def diffusion(
    z: np.ndarray, losses: LossRates, linear_loss_mode: str = "printed"
) -> np.ndarray:
    """Noise matrix B with shape (..., 4, 4 + n_linear_columns).

    Columns 1-4 are the two-body loss channels (inter-species at wells
    A, B; intra-species at wells A, B); the remaining columns carry the
    linear loss, one per lossy mode.  In "printed" mode this is the 4x6
    layout of the source derivation, row for row.
    """
    cols = _linear_loss_cols(linear_loss_mode)
    b = np.zeros(z.shape[:-1] + (4, 4 + len(cols)), dtype=complex)
    s12 = math.sqrt(losses.gamma12)
    s22 = math.sqrt(losses.gamma22)
    s1 = math.sqrt(losses.gamma1)
    a1, b1_, a2, b2_ = z[..., 0], z[..., 1], z[..., 2], z[..., 3]
    b[..., 0, 0] = s12 * a2
    b[..., 1, 1] = s12 * b2_
    b[..., 2, 0] = s12 * a1
    b[..., 2, 2] = s22 * a2
    b[..., 3, 1] = s12 * b1_
    b[..., 3, 3] = s22 * b2_
    for j, col in enumerate(cols):
        b[..., col, 4 + j] = s1
    return b


def _noise_term(
    z: np.ndarray, losses: LossRates, dz_noise: np.ndarray, linear_loss_mode: str
) -> np.ndarray:
    """B(z) @ dZ without materializing B (hot path of the steppers)."""
    out = np.zeros_like(z)
    if losses.gamma12:
        s12 = math.sqrt(losses.gamma12)
        out[..., 0] += s12 * z[..., 2] * dz_noise[..., 0]
        out[..., 1] += s12 * z[..., 3] * dz_noise[..., 1]
        out[..., 2] += s12 * z[..., 0] * dz_noise[..., 0]
        out[..., 3] += s12 * z[..., 1] * dz_noise[..., 1]
    if losses.gamma22:
        s22 = math.sqrt(losses.gamma22)
        out[..., 2] += s22 * z[..., 2] * dz_noise[..., 2]
        out[..., 3] += s22 * z[..., 3] * dz_noise[..., 3]
    if losses.gamma1:
        s1 = math.sqrt(losses.gamma1)
        for j, col in enumerate(_linear_loss_cols(linear_loss_mode)):
            out[..., col] += s1 * dz_noise[..., 4 + j]
    return out


MIDPOINT_ITERATIONS = 3


def step(
    state: np.ndarray,
    couplings: PhysicalCouplings,
    losses: LossRates,
    dtau: float,
    noise: np.ndarray | None = None,
    stepper: str = "midpoint",
    linear_loss_mode: str = "symmetric",
) -> np.ndarray:
    """One integrator step of dz = a dτ + B dZ.

    `noise` carries the complex Wiener increments (independent real and
    imaginary parts of variance dτ/2 each); None is allowed for lossless
    dynamics.  The midpoint stepper treats the flow semi-implicitly with
    a fixed number of fixed-point iterations; B is analytic in z, so the
    midpoint and Euler-Maruyama schemes converge to the same process.
    """

    def increment(at):
        dz = drift(at, couplings, losses, linear_loss_mode) * dtau
        if noise is not None and losses.enabled:
            dz += _noise_term(at, losses, noise, linear_loss_mode)
        return dz

    if stepper == "euler-maruyama":
        return state + increment(state)
    if stepper != "midpoint":
        raise ConfigError([f"wigner.stepper: unknown stepper {stepper!r}"])
    mid = state
    for _ in range(MIDPOINT_ITERATIONS):
        mid = state + 0.5 * increment(mid)
    return 2.0 * mid - state


def sample_initial(initial: InitialState, rng: np.random.Generator, n: int) -> np.ndarray:
    """n samples of the initial Wigner distribution, z-order (α1, β1, α2, β2).

    Each mode is mean + half a unit complex Gaussian: the added noise has
    total variance 1/2 (the vacuum half-quantum of symmetric ordering).
    """
    eta = rng.standard_normal((n, 4, 2))
    z = 0.5 * (eta[..., 0] + 1j * eta[..., 1])
    z[:, 0] += initial.alpha_a
    z[:, 1] += initial.alpha_b
    z[:, 2] += initial.alpha_a
    z[:, 3] += initial.alpha_b
    return z


@dataclass
class WignerRun:
    """Output of `run_ensemble`: one accumulator per requested time."""

    taus: tuple
    accumulators: list
    n_traj: int
    params: SimConfig

    def source(self, index: int) -> WignerMomentSource:
        return WignerMomentSource(self.accumulators[index])


def _chunk_rng(seed: int, chunk_id: int) -> np.random.Generator:
    key = np.array([seed, chunk_id], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def run_ensemble(
    couplings: PhysicalCouplings,
    losses: LossRates,
    initial: InitialState,
    taus,
    params: SimConfig,
    n_traj: int | None = None,
    chunk_offset: int = 0,
) -> WignerRun:
    """Integrate an ensemble and accumulate moments at every requested tau.

    Deterministic: chunk c consumes only the stream keyed (seed,
    chunk_offset + c), in a fixed draw order, so identical parameters
    give bit-identical accumulators and two half-ensembles (via
    `chunk_offset`) merge into exactly the full-ensemble result.
    """
    taus = tuple(float(t) for t in taus)
    if not taus or taus[0] < 0 or any(b <= a for a, b in zip(taus, taus[1:])):
        raise ConfigError(["sweep.tau_grid: must be non-empty, >= 0, strictly increasing"])
    n_traj = params.n_traj if n_traj is None else int(n_traj)
    csize = params.chunk_size
    if n_traj < 2 or n_traj % csize:
        raise ConfigError(
            [f"wigner.n_traj: need a multiple of chunk_size={csize}, >= 2; got {n_traj}"]
        )
    n_chunks = n_traj // csize
    rngs = [_chunk_rng(params.seed, chunk_offset + c) for c in range(n_chunks)]
    slices = [slice(c * csize, (c + 1) * csize) for c in range(n_chunks)]

    z = np.empty((n_traj, 4), dtype=complex)
    for c in range(n_chunks):
        z[slices[c]] = sample_initial(initial, rngs[c], csize)

    draw_noise = losses.enabled
    ncols = n_noise_columns(params.linear_loss_mode)
    noise = np.empty((n_traj, ncols), dtype=complex) if draw_noise else None

    accumulators = [MomentAccumulator() for _ in taus]
    cols = np.empty((csize, NBASIS), dtype=complex)

    def record(i_tau: int) -> None:
        for c in range(n_chunks):
            zc = z[slices[c]]
            monomial_columns(zc, out=cols)
            sums = cols.sum(axis=0)
            sumsq = (cols.real * cols.real + cols.imag * cols.imag).sum(axis=0)
            accumulators[i_tau].add_chunk(chunk_offset + c, csize, sums, sumsq)

    def check_finite(tau: float, steps_done: int) -> None:
        finite = np.isfinite(z).all(axis=1)
        if not finite.all():
            bad = int(np.argmin(finite))
            raise DivergenceError(tau, chunk_offset * csize + bad, steps_done)

    pos = 0.0
    steps_done = 0
    for i, target in enumerate(taus):
        span = target - pos
        if span > 0.0:
            nsub = max(1, math.ceil(span / params.dtau - 1e-12))
            h = span / nsub
            scale = math.sqrt(0.5 * h)
            for _ in range(nsub):
                if draw_noise:
                    for c in range(n_chunks):
                        raw = rngs[c].standard_normal((csize, ncols, 2))
                        noise[slices[c]] = scale * (raw[..., 0] + 1j * raw[..., 1])
                z = step(
                    z,
                    couplings,
                    losses,
                    h,
                    noise,
                    params.stepper,
                    params.linear_loss_mode,
                )
                steps_done += 1
            pos = target
        check_finite(target, steps_done)
        record(i)
    return WignerRun(taus, accumulators, n_traj, params)
