"""Full-space protocol simulation and target-unitary construction.

simulate_protocol runs the alternating sequence

    prod_k exp(-i G_{phi_k} t_k),   G_phi = e^{i phi Z/2} H e^{-i phi Z/2}

on the whole direct-sum space, with an optional multiplicative error on
each step time (the dominant control-field error channel: the relative
accuracy of each pulse's time integral).  build_target_unitary assembles
the closed-form goal

    U_f = i * [[ sqrt(I - f(Ad) f(A)),  f(Ad) ],
               [ f(A),                 -sqrt(I - f(A) f(Ad)) ]]

which is unitary and anti-Hermitian at once; the global factor i is part
of the contract and verification uses plain operator distance, never a
phase-invariant one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .compiler import PhaseSchedule, reduced_model
from .embedding import BlockHamiltonian, decompose_subspaces, embed
from .errors import CapError, InvalidInputError
from .targets import TargetFunction

UNITARITY_TOL = 1e-10
ANTIHERM_TOL = 1e-10


@dataclass(frozen=True)
class TargetUnitary:
    matrix: np.ndarray
    a_block: np.ndarray
    f: TargetFunction

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def unitarity_defect(self) -> float:
        u = self.matrix
        return float(np.linalg.norm(u.conj().T @ u - np.eye(self.dim), 2))

    def antihermiticity_defect(self) -> float:
        return float(np.linalg.norm(self.matrix + self.matrix.conj().T, 2))


@dataclass(frozen=True)
class ControlNoiseModel:
    eta: float
    seed: int = 0

    def __post_init__(self):
        if not (self.eta >= 0.0):
            raise InvalidInputError(f"eta must be >= 0, got {self.eta}")

    def time_factors(self, count: int) -> np.ndarray:
        """Per-step multiplicative factors 1 + eta * N(0, 1), in step order."""
        rng = np.random.default_rng(self.seed)
        return 1.0 + self.eta * rng.standard_normal(count)


@dataclass(frozen=True)
class ProtocolResult:
    unitary: np.ndarray
    a_block: np.ndarray
    schedule_used: PhaseSchedule
    noise_model: ControlNoiseModel | None = None
    achieved_eps: float | None = None


def build_target_unitary(a, f: TargetFunction) -> TargetUnitary:
    """Closed-form target from the SVD of A with f applied to singular values.

    f is evaluated analytically, also for singular values outside the
    synthesis domain (the schedule's accuracy guarantee does not cover
    those; verify reports them separately).  Values |f(sigma)| > 1 leave
    no real complementary square root and raise a cap error.
    """
    h = embed(a)                       # validates sigma_max <= 1
    a = h.a_block
    m, n = a.shape
    res = linalg.svd(a)
    fs = np.asarray(f.eval_analytic(res.singulars), dtype=float)
    if np.any(np.abs(fs) > 1.0 + 1e-12):
        raise CapError(
            f"|f(sigma)| reaches {np.max(np.abs(fs)):.6g} > 1; "
            "no unitary completion exists"
        )
    fs = np.clip(fs, -1.0, 1.0)
    f_a = (res.left_vectors * fs) @ res.right_vectors.conj().T       # m x n
    upper = linalg.sqrt_psd(np.eye(n) - f_a.conj().T @ f_a)
    lower = linalg.sqrt_psd(np.eye(m) - f_a @ f_a.conj().T)
    u = np.zeros((n + m, n + m), dtype=complex)
    u[:n, :n] = 1j * upper
    u[:n, n:] = 1j * f_a.conj().T
    u[n:, :n] = 1j * f_a
    u[n:, n:] = -1j * lower
    return TargetUnitary(matrix=u, a_block=a, f=f)


def _phase_diagonal(n: int, m: int, phi: float) -> np.ndarray:
    """Diagonal of exp(i phi Z / 2)."""
    d = np.empty(n + m, dtype=complex)
    d[:n] = np.exp(0.5j * phi)
    d[n:] = np.exp(-0.5j * phi)
    return d


def _protocol_unitary(eig: linalg.HermitianEig, n: int, m: int,
                      phis, times) -> np.ndarray:
    """Product of conjugated evolutions from a cached eigendecomposition."""
    v = eig.eigenvectors
    w = eig.eigenvalues
    u = np.eye(n + m, dtype=complex)
    for phi, t in zip(phis, times):
        d = _phase_diagonal(n, m, phi)
        step = (v * np.exp(-1j * w * t)) @ v.conj().T
        u = (d[:, None] * step * np.conj(d)[None, :]) @ u
    return u


def simulate_protocol(a, schedule: PhaseSchedule,
                      noise: ControlNoiseModel | None = None,
                      target: TargetUnitary | None = None) -> ProtocolResult:
    """Run the full alternating protocol for the embedding of A.

    With a noise model, each step time t_k becomes t_k * (1 + eta_k) with
    eta_k drawn once per run from the model's seed; eta = 0 reproduces the
    noiseless product bit for bit.
    """
    h = embed(a)
    n, m = h.n, h.m
    eig = linalg.hermitian_eig(h.assemble())
    times = schedule.times()
    if noise is not None:
        times = times * noise.time_factors(schedule.degree)
    u = _protocol_unitary(eig, n, m, schedule.phis(), times)
    achieved = None
    if target is not None:
        achieved = linalg.op_distance(u, target.matrix)
    return ProtocolResult(unitary=u, a_block=h.a_block, schedule_used=schedule,
                          noise_model=noise, achieved_eps=achieved)


def verify(result: ProtocolResult, target: TargetUnitary, eps: float) -> dict:
    """Distance record with per-invariant-subspace residuals.

    Each singular pair (sigma_j, r_j, l_j) spans a 2-D subspace preserved by
    both operators; the record lists the restricted distances, flagging
    subspaces whose sigma lies outside the target's synthesis domain.
    """
    u_sim = result.unitary
    u_tgt = target.matrix
    if u_sim.shape != u_tgt.shape:
        raise InvalidInputError(
            f"shape mismatch: {u_sim.shape} vs {u_tgt.shape}")
    distance = linalg.op_distance(u_sim, u_tgt)
    dec = decompose_subspaces(embed(result.a_block))
    per_subspace = []
    for j, (sigma, _, _) in enumerate(dec.triples):
        basis = dec.pair_basis(j)
        diff = basis.conj().T @ (u_sim - u_tgt) @ basis
        in_domain = (target.f.sigma_lo - 1e-12 <= sigma
                     <= target.f.sigma_hi + 1e-12)
        per_subspace.append({
            "sigma": float(sigma),
            "residual": float(np.linalg.norm(diff, 2)),
            "in_domain": bool(in_domain),
        })
    return {
        "op_distance": float(distance),
        "eps": float(eps),
        "passed": bool(distance <= eps),
        "per_subspace": per_subspace,
    }


def reduced_restriction(result: ProtocolResult, j: int) -> np.ndarray:
    """2x2 restriction of the simulated unitary to invariant subspace j."""
    dec = decompose_subspaces(embed(result.a_block))
    basis = dec.pair_basis(j)
    return basis.conj().T @ result.unitary @ basis


def reduced_full_gap(result: ProtocolResult) -> float:
    """Max over subspaces of |restriction - reduced_model(schedule, sigma)|.

    This is the master consistency check between the full-space simulator
    and the compiler's 2x2 model; it should be at round-off level always.
    """
    dec = decompose_subspaces(embed(result.a_block))
    worst = 0.0
    for j, (sigma, _, _) in enumerate(dec.triples):
        basis = dec.pair_basis(j)
        got = basis.conj().T @ result.unitary @ basis
        want = reduced_model(result.schedule_used, sigma).matrix
        worst = max(worst, float(np.linalg.norm(got - want, 2)))
    return worst


def noise_sweep(a, schedule: PhaseSchedule, etas, trials: int,
                seed: int = 0) -> list[dict]:
    """Mean/max distance of noisy runs from the noiseless protocol.

    Trial i uses seed + i for every eta (common random numbers), so rows are
    directly comparable across etas and the whole table is deterministic.
    """
    if trials < 1:
        raise InvalidInputError("trials must be >= 1")
    h = embed(a)
    n, m = h.n, h.m
    eig = linalg.hermitian_eig(h.assemble())
    phis = schedule.phis()
    base_times = schedule.times()
    u0 = _protocol_unitary(eig, n, m, phis, base_times)
    table = []
    for eta in etas:
        eta = float(eta)
        if eta < 0:
            raise InvalidInputError("eta must be >= 0")
        dists = np.empty(trials)
        for i in range(trials):
            factors = ControlNoiseModel(eta, seed + i).time_factors(len(phis))
            u = _protocol_unitary(eig, n, m, phis, base_times * factors)
            dists[i] = np.linalg.norm(u - u0, 2)
        table.append({
            "eta": eta,
            "mean_distance": float(np.mean(dists)),
            "max_distance": float(np.max(dists)),
            "trials": int(trials),
        })
    return table
