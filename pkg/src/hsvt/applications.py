"""Applications of inverse block encoding.

Everything here runs in one of two backends:

* ``exact``    - closed-form blocks from the SVD (the test oracle),
* ``protocol`` - a compiled phase schedule simulated on the full space.

States are plain 1-D complex arrays; norms are reported, never forced.
Register phases: each application of the block unitary multiplies both
output blocks by the global factor i, which is deterministic bookkeeping
on the ancilla register; the cascade strips it (multiplies by -i) so block
k literally carries sqrt(I - Ad A) A^k psi and the last block A^n psi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import compiler, linalg, protocol, targets
from .compiler import PhaseSchedule, SolverOptions
from .errors import (ConvergenceError, GeneratorError, InvalidInputError,
                     PreconditionError, SingularInversionError,
                     ZeroProbabilitySignal)
from .protocol import ProtocolResult, TargetUnitary
from .targets import TargetFunction

DEFAULT_DOMAIN = (0.1, 0.9)
HISTORY_SCALE = 0.75
ZERO_PROB_TOL = 1e-14
STATE_NORM_TOL = 1e-10

_schedule_cache: dict = {}


def _as_state(psi) -> np.ndarray:
    v = np.asarray(psi, dtype=complex).reshape(-1)
    if v.size == 0 or not np.all(np.isfinite(v)):
        raise InvalidInputError("state must be a nonempty finite vector")
    return v


def amplification_rounds(p: float) -> int:
    """ceil(pi / (4 sqrt(p))), the amplitude-amplification iteration count.

    Bookkeeping only; no amplification operator is ever constructed.
    """
    if p <= 0.0:
        raise ZeroProbabilitySignal("success probability is zero")
    return int(math.ceil(math.pi / (4.0 * math.sqrt(p))))


def compiled_schedule(f: TargetFunction, eps: float,
                      opts: SolverOptions | None = None) -> PhaseSchedule:
    """Compile (and memoize) a schedule for f to accuracy eps.

    Degree grows adaptively up to three times the truncation-law estimate
    (the synthesized rate runs below the truncation rate by roughly a factor
    two); non-convergence within that budget raises.
    """
    opts = opts or SolverOptions(target_eps=eps, variable_t=True)
    key = (f, float(eps), opts.variable_t, opts.seed, opts.t_min)
    hit = _schedule_cache.get(key)
    if hit is not None:
        return hit
    estimate = targets.degree_for_accuracy(f.x_gap(), eps)
    k_max = max(3 * estimate.k, 16)
    schedule, report = compiler.synthesize_to_accuracy(f, eps, k_max, opts=opts)
    if not report.converged:
        raise ConvergenceError(
            f"synthesis reached residual {report.max_residual:.3e} > {eps:.3e} "
            f"within degree budget {k_max}"
        )
    _schedule_cache[key] = schedule
    return schedule


def _check_sigma_in_domain(a, lo: float, hi: float) -> np.ndarray:
    s = linalg.svd(a).singulars
    if np.any(s < lo - 1e-9) or np.any(s > hi + 1e-9):
        raise PreconditionError(
            f"singular values span [{s.min():.6g}, {s.max():.6g}], outside "
            f"the synthesis domain [{lo:.6g}, {hi:.6g}]"
        )
    return s


def inverse_block_encode(a, eps: float, domain=DEFAULT_DOMAIN,
                         opts: SolverOptions | None = None):
    """Identity-f pipeline: compile, simulate, and return the full triple.

    Returns (PhaseSchedule, ProtocolResult, TargetUnitary); the result's
    achieved_eps is the operator distance to the closed-form target.
    """
    a = linalg.as_complex_matrix(a, "A")
    if a.shape[0] != a.shape[1]:
        raise PreconditionError(
            "inverse block encoding needs a square block: the unitary acts "
            "as the identity on unpaired singular directions, which the "
            "anti-Hermitian target never does"
        )
    lo, hi = domain
    _check_sigma_in_domain(a, lo, hi)
    f = targets.identity(lo, hi)
    schedule = compiled_schedule(f, eps, opts)
    target = protocol.build_target_unitary(a, f)
    result = protocol.simulate_protocol(a, schedule, target=target)
    return schedule, result, target


# ---------------------------------------------------------------------------
# Matrix application
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ApplyResult:
    state: np.ndarray            # normalized A psi
    success_prob: float          # <psi| Ad A |psi>
    amplification: int           # ceil(pi / (4 sqrt(p)))


def _apply_block(a, x, f: TargetFunction, backend: str, eps: float,
                 opts: SolverOptions | None):
    """(sqrt-complement block, f(A) block) of the unitary applied to (x, 0)."""
    if backend == "exact":
        u = protocol.build_target_unitary(a, f).matrix
    elif backend == "protocol":
        _check_sigma_in_domain(a, f.sigma_lo, f.sigma_hi)
        schedule = compiled_schedule(f, eps, opts)
        u = protocol.simulate_protocol(a, schedule).unitary
    else:
        raise InvalidInputError(f"unknown backend {backend!r}")
    n = a.shape[1]
    y = u @ np.concatenate([x, np.zeros(a.shape[0], dtype=complex)])
    # strip the deterministic global factor i of the block unitary
    return -1j * y[:n], -1j * y[n:]


def apply_matrix(a, psi, backend: str = "exact", eps: float = 1e-3,
                 domain=DEFAULT_DOMAIN,
                 opts: SolverOptions | None = None) -> ApplyResult:
    a = linalg.as_complex_matrix(a, "A")
    psi = _as_state(psi)
    if abs(np.linalg.norm(psi) - 1.0) > STATE_NORM_TOL:
        raise InvalidInputError("apply_matrix expects a unit-norm state")
    if psi.size != a.shape[1]:
        raise InvalidInputError(
            f"state dimension {psi.size} does not match A columns {a.shape[1]}")
    f = targets.identity(*domain) if backend == "protocol" else \
        targets.identity(1e-6, 1.0 - 1e-9, cap=1.0)
    _, lower = _apply_block(a, psi, f, backend, eps, opts)
    p = float(np.real(np.vdot(lower, lower)))
    if p < ZERO_PROB_TOL:
        raise ZeroProbabilitySignal("A annihilates the input state")
    return ApplyResult(state=lower / math.sqrt(p), success_prob=p,
                       amplification=amplification_rounds(p))


# ---------------------------------------------------------------------------
# Power cascade / ODE / history state
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CascadeState:
    """n+1 equal-dimension register blocks of the deterministic cascade.

    Block k < n carries sqrt(I - Ad A) A^k psi, block n carries A^n psi.
    """

    blocks: tuple = field(default_factory=tuple)

    @property
    def n(self) -> int:
        return len(self.blocks) - 1

    @property
    def dim(self) -> int:
        return self.blocks[0].size

    def block(self, j: int) -> np.ndarray:
        return self.blocks[j]

    def total_norm_sq(self) -> float:
        return float(sum(np.real(np.vdot(b, b)) for b in self.blocks))

    def flatten(self) -> np.ndarray:
        return np.concatenate(self.blocks)


def power_cascade(a, psi, n: int, backend: str = "exact", eps: float = 1e-3,
                  domain=DEFAULT_DOMAIN, opts: SolverOptions | None = None):
    """Sequential block application over register pairs; returns the n+1
    blocks and the probability of finding the last register occupied.
    """
    a = linalg.as_complex_matrix(a, "A")
    if a.shape[0] != a.shape[1]:
        raise InvalidInputError("power cascade needs a square matrix")
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    psi = _as_state(psi)
    if psi.size != a.shape[1]:
        raise InvalidInputError("state dimension does not match A")
    f = targets.identity(*domain) if backend == "protocol" else \
        targets.identity(1e-6, 1.0 - 1e-9, cap=1.0)
    blocks = []
    carried = psi
    for _ in range(n):
        fixed, carried = _apply_block(a, carried, f, backend, eps, opts)
        blocks.append(fixed)
    blocks.append(carried)
    state = CascadeState(blocks=tuple(blocks))
    final_prob = float(np.real(np.vdot(carried, carried)))
    return state, final_prob


@dataclass(frozen=True)
class OdeProblem:
    b: np.ndarray
    dt: float
    steps: int
    psi0: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "b", linalg.as_complex_matrix(self.b, "B"))
        object.__setattr__(self, "psi0", _as_state(self.psi0))
        if not (self.dt > 0.0):
            raise InvalidInputError("dt must be positive")
        if self.steps < 1:
            raise InvalidInputError("steps must be >= 1")
        if self.b.shape[0] != self.b.shape[1]:
            raise InvalidInputError("B must be square")
        if self.psi0.size != self.b.shape[0]:
            raise InvalidInputError("psi0 dimension does not match B")

    def euler_matrix(self) -> np.ndarray:
        return np.eye(self.b.shape[0], dtype=complex) + self.b * self.dt


def ode_solve(problem: OdeProblem, backend: str = "exact", eps: float = 1e-3,
              domain=DEFAULT_DOMAIN, opts: SolverOptions | None = None):
    """Forward-Euler evolution as a power cascade of A = I + B dt.

    The final register holds (I + B dt)^steps psi0; its squared norm is the
    probability of projecting onto the solution at time T = steps * dt.
    """
    a = problem.euler_matrix()
    sigma_max = float(np.linalg.norm(a, 2))
    if sigma_max > 1.0 + 1e-10:
        sym = problem.b + problem.b.conj().T
        worst = float(np.max(np.linalg.eigvalsh(sym)))
        raise GeneratorError(sigma_max=sigma_max, worst_eig=worst)
    cascade, _ = power_cascade(a, problem.psi0, problem.steps, backend=backend,
                               eps=eps, domain=domain, opts=opts)
    return cascade, cascade.block(problem.steps)


@dataclass(frozen=True)
class HistoryResult:
    history: np.ndarray          # normalized concat of A^k psi over k = 0..n
    success_prob: float          # squared norm of the rescaled raw state
    kappa_tilde: float           # sigma_max / sigma_min of sqrt(I - Ad A)
    amplification: int


def history_state(a, psi, n: int, eps: float = 1e-3, backend: str = "exact",
                  opts: SolverOptions | None = None) -> HistoryResult:
    """Normalized sum_k A^k psi |k> via singular-value inversion.

    The cascade leaves sqrt(I - Ad A) A^k psi in blocks 0..n-1; applying
    c / s to the singular values s of S = sqrt(I - Ad A) (with c = the
    smallest s, so the transformation stays a contraction) and scaling the
    last block by the same c yields c times the history state.  The squared
    norm of that vector is the reported success probability; it is
    Omega(1 / kappa_tilde^2), and the amplification bookkeeping recovers
    the O(kappa_tilde) round count.
    """
    a = linalg.as_complex_matrix(a, "A")
    if a.shape[0] != a.shape[1]:
        raise InvalidInputError("history state needs a square matrix")
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    psi = _as_state(psi)
    sigma_max = float(np.linalg.norm(a, 2))
    if sigma_max > 1.0 - 1e-6:
        raise SingularInversionError(
            f"sigma_max(A) = {sigma_max:.8g} leaves sqrt(I - Ad A) "
            "numerically singular (kappa_tilde -> inf)"
        )
    s_mat = linalg.sqrt_psd(np.eye(a.shape[0]) - a.conj().T @ a)
    s_eigs = np.linalg.eigvalsh(s_mat)
    s_min, s_max = float(s_eigs[0]), float(s_eigs[-1])
    kappa = s_max / s_min
    cascade, _ = power_cascade(a, psi, n, backend="exact")

    if backend == "exact":
        c = s_min
        inv = c * np.linalg.inv(s_mat)
        raw = [inv @ cascade.block(k) for k in range(n)]
    elif backend == "protocol":
        # S is Hermitian PSD, so embedding S itself and applying c/s to its
        # singular values inverts it without a residual polar rotation.
        lo = max(1e-3, 0.98 * s_min)
        hi = min(1.0 - 1e-6, 1.02 * s_max)
        # keep c / s well below the cap: synthesis stiffens badly when the
        # target approaches 1 and the complementary sqrt(1 - f^2) approaches 0
        c = HISTORY_SCALE * lo
        f_inv = targets.scaled_power(-1.0, c, lo, hi)
        raw = []
        for k in range(n):
            _, lower = _apply_block(s_mat, cascade.block(k), f_inv,
                                    "protocol", eps, opts)
            raw.append(lower)
    else:
        raise InvalidInputError(f"unknown backend {backend!r}")

    raw.append(c * cascade.block(n))
    vec = np.concatenate(raw)
    p = float(np.real(np.vdot(vec, vec))) / float(np.real(np.vdot(psi, psi)))
    if p < ZERO_PROB_TOL:
        raise ZeroProbabilitySignal("history state has zero weight")
    return HistoryResult(history=vec / np.linalg.norm(vec), success_prob=p,
                         kappa_tilde=kappa,
                         amplification=amplification_rounds(p))
