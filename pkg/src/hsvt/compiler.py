"""Phase-schedule synthesis for singular-value transformations.

A schedule is an ordered list of steps (phi_k, t_k).  Inside the invariant
subspace with singular value sigma, step k acts as the 2x2 rotation

    exp(-i sigma t_k (cos phi_k X - sin phi_k Y))

(the lower-left entry of the generator carries e^{-i phi}), and the whole
schedule acts as the right-to-left product of these rotations.  Synthesis
finds phases (and optionally times) whose product approximates the target

    [[ i sqrt(1 - f^2),  i f              ],
     [ i f,              -i sqrt(1 - f^2) ]]

on a Chebyshev grid of sigma nodes, by damped least squares with analytic
Jacobians and degree continuation (a converged degree-k solution extends to
k+2 exactly, by inserting the canceling pair (phi, phi + pi)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import least_squares

from .errors import CapError, InvalidInputError, ParseError
from .targets import TargetFunction

CONVENTION = "lower-left-e-minus-i-phi"
PQ_IDENTITY_TOL = 1e-10
T_MIN = 1e-9
T_MAX = 8.0


def _wrap_phase(phi: float) -> float:
    """Reduce to (-pi, pi]."""
    w = math.fmod(phi + math.pi, 2.0 * math.pi)
    if w <= 0.0:
        w += 2.0 * math.pi
    return w - math.pi


@dataclass(frozen=True)
class PhaseStep:
    phi: float
    t: float

    def __post_init__(self):
        if not (self.t > 0.0):
            raise InvalidInputError(f"step time must be positive, got {self.t}")
        object.__setattr__(self, "phi", _wrap_phase(self.phi))


@dataclass(frozen=True)
class PhaseSchedule:
    steps: tuple
    convention: str = CONVENTION

    @property
    def degree(self) -> int:
        return len(self.steps)

    def phis(self) -> np.ndarray:
        return np.array([s.phi for s in self.steps], dtype=float)

    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.steps], dtype=float)

    # v1 text format ------------------------------------------------------

    def to_text(self) -> str:
        lines = [f"# hsvt-schedule v1 k={self.degree} convention={self.convention}"]
        for s in self.steps:
            lines.append(f"{s.phi:.17g},{s.t:.17g}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, path=None) -> "PhaseSchedule":
        lines = text.splitlines()
        if not lines or not lines[0].startswith("# hsvt-schedule v1"):
            raise ParseError("missing 'hsvt-schedule v1' header", path=path, line=1)
        fields = dict(
            tok.split("=", 1) for tok in lines[0].split()[2:] if "=" in tok
        )
        if "k" not in fields:
            raise ParseError("header lacks k=<degree>", path=path, line=1, field="k")
        convention = fields.get("convention", CONVENTION)
        steps = []
        for i, line in enumerate(lines[1:], start=2):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ParseError("expected 'phi,t'", path=path, line=i)
            try:
                phi, t = float(parts[0]), float(parts[1])
            except ValueError as exc:
                raise ParseError(f"bad number: {exc}", path=path, line=i) from exc
            if not (t > 0.0):
                raise ParseError("step time must be positive", path=path, line=i, field="t")
            steps.append(PhaseStep(phi=phi, t=t))
        if len(steps) != int(fields["k"]):
            raise ParseError(
                f"header says k={fields['k']} but found {len(steps)} steps",
                path=path, field="k",
            )
        return cls(steps=tuple(steps), convention=convention)


def schedule_from_arrays(phis, times=None) -> PhaseSchedule:
    phis = np.asarray(phis, dtype=float)
    times = np.ones_like(phis) if times is None else np.asarray(times, dtype=float)
    return PhaseSchedule(steps=tuple(PhaseStep(p, t) for p, t in zip(phis, times)))


@dataclass(frozen=True)
class ReducedUnitary:
    matrix: np.ndarray   # 2x2

    @property
    def p_corner(self) -> complex:
        """Upper-left entry, the P(cos sigma) polynomial corner."""
        return complex(self.matrix[0, 0])

    @property
    def q_corner(self) -> complex:
        """Upper-right entry, the i sin(sigma) Q(cos sigma) corner."""
        return complex(self.matrix[0, 1])

    @property
    def f_corner(self) -> complex:
        """Lower-left entry; the target convention puts i f(sigma) here."""
        return complex(self.matrix[1, 0])


@dataclass(frozen=True)
class SynthesisReport:
    grid: np.ndarray
    residual_per_node: np.ndarray
    max_residual: float
    target_eps: float
    iterations: int
    converged: bool
    metric: str = "full"

    def to_dict(self) -> dict:
        return {
            "grid": [float(x) for x in self.grid],
            "residual_per_node": [float(x) for x in self.residual_per_node],
            "max_residual": float(self.max_residual),
            "target_eps": float(self.target_eps),
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
            "metric": self.metric,
        }


@dataclass(frozen=True)
class SolverOptions:
    target_eps: float = 1e-3
    seed: int = 0
    restarts: int = 8
    variable_t: bool = False
    metric: str = "full"          # 'full' or 'corner'
    max_nfev: int = 1200
    continuation: bool = True
    t_min: float = 1e-3           # lower bound on step times (variable-t mode)


# ---------------------------------------------------------------------------
# Reduced-model kernels (vectorized over sigma nodes)
# ---------------------------------------------------------------------------

_I2 = np.eye(2, dtype=complex)


def _step_matrices(phis, times, sigmas):
    """(K, N, 2, 2) array of per-step reduced rotations."""
    angles = np.multiply.outer(times, sigmas)          # (K, N)
    st, ct = np.sin(angles), np.cos(angles)
    e = np.exp(1j * phis)
    m = np.zeros(angles.shape + (2, 2), dtype=complex)
    m[..., 0, 0] = ct
    m[..., 1, 1] = ct
    m[..., 0, 1] = -1j * st * e[:, None]
    m[..., 1, 0] = -1j * st * np.conj(e)[:, None]
    return m


def _product_chain(m):
    """Prefix and suffix partial products of (K, N, 2, 2) step matrices."""
    K, N = m.shape[:2]
    pre = np.empty((K + 1, N, 2, 2), dtype=complex)
    pre[0] = _I2
    for k in range(K):
        pre[k + 1] = m[k] @ pre[k]
    suf = np.empty((K + 1, N, 2, 2), dtype=complex)
    suf[K] = _I2
    for k in range(K - 1, -1, -1):
        suf[k] = suf[k + 1] @ m[k]
    return pre, suf


def reduced_product(schedule: PhaseSchedule, sigmas) -> np.ndarray:
    """(N, 2, 2) reduced unitaries at each sigma node."""
    sigmas = np.atleast_1d(np.asarray(sigmas, dtype=float))
    if schedule.degree == 0:
        return np.broadcast_to(_I2, (len(sigmas), 2, 2)).copy()
    m = _step_matrices(schedule.phis(), schedule.times(), sigmas)
    u = np.broadcast_to(_I2, (len(sigmas), 2, 2)).copy()
    for k in range(schedule.degree):
        u = m[k] @ u
    return u


def reduced_model(schedule: PhaseSchedule, sigma: float) -> ReducedUnitary:
    if sigma < 0:
        raise InvalidInputError("sigma must be >= 0")
    return ReducedUnitary(matrix=reduced_product(schedule, [float(sigma)])[0])


def reduced_target(f_values) -> np.ndarray:
    """(N, 2, 2) target unitaries i*(sqrt(1-f^2) Z + f X) from f samples."""
    fv = np.atleast_1d(np.asarray(f_values, dtype=float))
    if np.any(np.abs(fv) > 1.0 + 1e-12):
        raise CapError(f"|f| reaches {np.max(np.abs(fv)):.6g} > 1")
    gv = np.sqrt(np.clip(1.0 - fv**2, 0.0, None))
    t = np.zeros((len(fv), 2, 2), dtype=complex)
    t[:, 0, 0] = 1j * gv
    t[:, 1, 1] = -1j * gv
    t[:, 0, 1] = 1j * fv
    t[:, 1, 0] = 1j * fv
    return t


def chebyshev_grid(lo: float, hi: float, n: int) -> np.ndarray:
    i = np.arange(n)
    return 0.5 * (lo + hi) + 0.5 * (hi - lo) * np.cos(np.pi * (2 * i + 1) / (2 * n))


def _residual_jacobian(params, sigmas, target, variable_t, metric):
    """Stacked real residual vector and its Jacobian.

    metric 'full' uses all four entries of U - T; 'corner' only the
    lower-left entry minus i f.
    """
    if variable_t:
        K = len(params) // 2
        phis, times = params[:K], params[K:]
    else:
        K = len(params)
        phis, times = params, np.ones(K)
    N = len(sigmas)
    m = _step_matrices(phis, times, sigmas)
    pre, suf = _product_chain(m)
    u = pre[K]

    angles = np.multiply.outer(times, sigmas)
    st, ct = np.sin(angles), np.cos(angles)
    e = np.exp(1j * phis)

    d_phi = np.zeros((K, N, 2, 2), dtype=complex)
    d_phi[..., 0, 1] = st * e[:, None]
    d_phi[..., 1, 0] = -st * np.conj(e)[:, None]
    du_dphi = np.einsum("knab,knbc,kncd->knad", suf[1:], d_phi, pre[:-1])

    blocks = [du_dphi]
    if variable_t:
        d_t = np.zeros((K, N, 2, 2), dtype=complex)
        sg = sigmas[None, :]
        d_t[..., 0, 0] = -sg * st
        d_t[..., 1, 1] = -sg * st
        d_t[..., 0, 1] = -1j * sg * ct * e[:, None]
        d_t[..., 1, 0] = -1j * sg * ct * np.conj(e)[:, None]
        blocks.append(np.einsum("knab,knbc,kncd->knad", suf[1:], d_t, pre[:-1]))
    du = np.concatenate(blocks, axis=0)          # (P, N, 2, 2)

    if metric == "corner":
        r_c = u[:, 1, 0] - target[:, 1, 0]
        j_c = du[:, :, 1, 0]
    else:
        r_c = (u - target).reshape(N * 4)
        j_c = du.reshape(du.shape[0], N * 4)
    res = np.concatenate([r_c.real, r_c.imag])
    jac = np.concatenate([j_c.real, j_c.imag], axis=1).T
    return res, jac, u


def _node_residuals(u, target, metric):
    if metric == "corner":
        return np.abs(u[:, 1, 0] - target[:, 1, 0])
    return np.linalg.norm(u - target, 2, axis=(1, 2))


class _CachedObjective:
    """Memoizes the shared residual/Jacobian computation per parameter vector."""

    def __init__(self, sigmas, target, variable_t, metric):
        self.args = (sigmas, target, variable_t, metric)
        self._key = None
        self._value = None

    def _eval(self, params):
        key = params.tobytes()
        if key != self._key:
            self._value = _residual_jacobian(params, *self.args)
            self._key = key
        return self._value

    def residual(self, params):
        return self._eval(params)[0]

    def jacobian(self, params):
        return self._eval(params)[1]

    def unitaries(self, params):
        return self._eval(params)[2]


def _solve_fixed_degree(k, sigmas, target, opts: SolverOptions, inits, max_nfev):
    """Best local minimum over the given initial points."""
    if opts.variable_t:
        lb = np.concatenate([np.full(k, -2 * np.pi), np.full(k, opts.t_min)])
        ub = np.concatenate([np.full(k, 2 * np.pi), np.full(k, T_MAX)])
        method = "trf"
        bounds = (lb, ub)
    else:
        method = "lm"
        bounds = (-np.inf, np.inf)
    obj = _CachedObjective(sigmas, target, opts.variable_t, opts.metric)
    best = None
    nfev_total = 0
    for x0 in inits:
        if opts.variable_t:
            x0 = np.clip(x0, bounds[0] + 1e-12, bounds[1] - 1e-12)
        sol = least_squares(
            obj.residual,
            x0,
            jac=obj.jacobian,
            method=method,
            bounds=bounds,
            xtol=3e-16, ftol=3e-16, gtol=3e-16,
            max_nfev=max_nfev,
        )
        nfev_total += sol.nfev
        u = obj.unitaries(sol.x)
        mx = float(np.max(_node_residuals(u, target, opts.metric)))
        if best is None or mx < best[0]:
            best = (mx, sol.x)
        if best[0] <= 0.5 * opts.target_eps:
            break
    return best[0], best[1], nfev_total


# ---------------------------------------------------------------------------
# Symmetric search space
#
# The reduced target matrix is symmetric (equal corners), and a schedule whose
# phases are anti-palindromic (phi_j = -phi_{K+1-j}) with palindromic times
# produces an exactly symmetric product.  Searching this halved space is much
# better conditioned; the result then seeds an unrestricted final polish.
# ---------------------------------------------------------------------------

T_SOLVE_MIN = 1e-3


def _sym_sizes(k):
    return k // 2, (k % 2 == 1)


def _sym_expand(y, k, variable_t):
    """Half-space vector -> full (phis, times) arrays of length k."""
    m, mid = _sym_sizes(k)
    h = y[:m]
    phis = np.concatenate([h, [0.0] if mid else [], -h[::-1]])
    if variable_t:
        tau = y[m:2 * m]
        t_mid = y[2 * m:] if mid else np.empty(0)
        times = np.concatenate([tau, t_mid, tau[::-1]])
    else:
        times = np.ones(k)
    return phis, times


def _sym_residual_jacobian(y, k, sigmas, target, variable_t, metric):
    phis, times = _sym_expand(y, k, variable_t)
    params = np.concatenate([phis, times]) if variable_t else phis
    res, jac, u = _residual_jacobian(params, sigmas, target, variable_t, metric)
    m, mid = _sym_sizes(k)
    j_phi = jac[:, :k]
    cols = [j_phi[:, :m] - j_phi[:, k - m:][:, ::-1]]
    if variable_t:
        j_t = jac[:, k:]
        cols.append(j_t[:, :m] + j_t[:, k - m:][:, ::-1])
        if mid:
            cols.append(j_t[:, m:m + 1])
    return res, np.hstack(cols), u


class _CachedSymObjective:
    def __init__(self, k, sigmas, target, variable_t, metric):
        self.args = (k, sigmas, target, variable_t, metric)
        self._key = None
        self._value = None

    def _eval(self, y):
        key = y.tobytes()
        if key != self._key:
            self._value = _sym_residual_jacobian(y, *self.args)
            self._key = key
        return self._value

    def residual(self, y):
        return self._eval(y)[0]

    def jacobian(self, y):
        return self._eval(y)[1]

    def unitaries(self, y):
        return self._eval(y)[2]


def _solve_symmetric(k, sigmas, target, opts: SolverOptions, inits, max_nfev):
    m, mid = _sym_sizes(k)
    n_par = m + (m + (1 if mid else 0) if opts.variable_t else 0)
    if opts.variable_t:
        lb = np.concatenate([np.full(m, -2 * np.pi), np.full(n_par - m, opts.t_min)])
        ub = np.concatenate([np.full(m, 2 * np.pi), np.full(n_par - m, T_MAX)])
        method, bounds = "trf", (lb, ub)
    else:
        method, bounds = "lm", (-np.inf, np.inf)
    obj = _CachedSymObjective(k, sigmas, target, opts.variable_t, opts.metric)
    best = None
    nfev_total = 0
    for y0 in inits:
        if opts.variable_t:
            y0 = np.clip(y0, bounds[0] + 1e-12, bounds[1] - 1e-12)
        sol = least_squares(
            obj.residual, y0, jac=obj.jacobian, method=method, bounds=bounds,
            xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=max_nfev,
            x_scale="jac" if opts.variable_t else 1.0,
        )
        nfev_total += sol.nfev
        u = obj.unitaries(sol.x)
        mx = float(np.max(_node_residuals(u, target, opts.metric)))
        if best is None or mx < best[0]:
            best = (mx, sol.x)
        if best[0] <= 0.5 * opts.target_eps:
            break
    return best[0], best[1], nfev_total


def _sym_grow(y, k, grow_by, variable_t):
    """Extend a half-space solution to degree k + 2*grow_by, product preserved.

    Variable-t schedules split their largest steps in two (same phase, half
    the time); fixed-t schedules append a canceling (phi, phi + pi) pair,
    which requires grow_by to be even.
    """
    m, mid = _sym_sizes(k)
    if variable_t:
        ph, tau = list(y[:m]), list(y[m:2 * m])
        t_mid = list(y[2 * m:])
        for _ in range(grow_by):
            j = int(np.argmax(tau)) if tau else 0
            if not tau:
                ph.append(0.0)
                tau.append(1.0)
                continue
            ph.insert(j + 1, ph[j])
            half = tau[j] / 2.0
            tau[j] = half
            tau.insert(j + 1, half)
        return np.concatenate([ph, tau, t_mid]), k + 2 * grow_by
    ph = list(y[:m])
    for _ in range(grow_by // 2):
        anchor = ph[-1] if ph else 0.0
        ph.extend([anchor, anchor + np.pi])
    return np.asarray(ph), k + 2 * (grow_by - grow_by % 2)


def _stage_solve(k, f, target_of, opts, inits, max_nfev):
    """Solve one continuation stage on its own (coarser) Chebyshev grid."""
    n = max(2 * k, 16)
    sigmas = chebyshev_grid(f.sigma_lo, f.sigma_hi, n)
    target = target_of(sigmas)
    mx, y, nf = _solve_symmetric(k, sigmas, target, opts, inits, max_nfev)
    return mx, y, nf


def _sym_continuation(f, k, target_of, opts, rng, eps_stop=None):
    """Grow a symmetric solution from low degree up to k.

    Returns (residual, half_vector, degree_reached, nfev).  If eps_stop is
    given, stops early at the first degree whose stage residual meets it.
    """
    m, mid = _sym_sizes(k)
    variable_t = opts.variable_t
    if variable_t:
        m0 = min(m, 4)
    else:
        # low-degree cold starts find the right basin; pair growth needs
        # the starting half-size to match the parity of the final one
        m0 = min(m, 2 + (m % 2))
    k0 = 2 * m0 + (1 if mid else 0)
    y = np.zeros(m0) if not variable_t else np.concatenate(
        [np.zeros(m0), np.ones(m0 + (1 if mid else 0))])
    inits = [y, ]
    if variable_t:
        inits += [np.concatenate([rng.uniform(-np.pi, np.pi, m0),
                                  rng.uniform(0.5, 2.5, m0 + (1 if mid else 0))])
                  for _ in range(2)]
    else:
        inits += [rng.uniform(-np.pi, np.pi, m0) for _ in range(2)]
    stage_nfev = min(opts.max_nfev, 400)
    kc = k0
    mx, y, nfev = _stage_solve(kc, f, target_of, opts, inits, stage_nfev)
    while kc < k:
        if eps_stop is not None and mx <= eps_stop:
            break
        mc = _sym_sizes(kc)[0]
        grow = min(2 if variable_t else 2, m - mc)
        if not variable_t and grow % 2 == 1:
            grow += 1 if m - mc > grow else -1
        if grow <= 0:
            break
        y, kc = _sym_grow(y, kc, grow, variable_t)
        mx, y, nf = _stage_solve(kc, f, target_of, opts, [y], stage_nfev)
        nfev += nf
    return mx, y, kc, nfev


def synthesize_schedule(f: TargetFunction, k: int, grid_size: int | None = None,
                        opts: SolverOptions | None = None):
    """Find a degree-k schedule approximating the target of f on its domain.

    Returns (PhaseSchedule, SynthesisReport).  Non-convergence is not an
    error: the best schedule is returned with converged=False.
    """
    opts = opts or SolverOptions()
    if k < 1:
        raise InvalidInputError("degree k must be >= 1")
    if grid_size is None:
        grid_size = 4 * k
    if grid_size < 2 * k:
        raise InvalidInputError(f"grid_size must be >= 2k = {2 * k}")
    sigmas = chebyshev_grid(f.sigma_lo, f.sigma_hi, grid_size)
    fvals = np.asarray(f(sigmas), dtype=float)
    if np.any(np.abs(fvals) > f.cap + 1e-12):
        raise CapError("target exceeds its cap on the synthesis grid")

    def target_of(nodes):
        return reduced_target(np.asarray(f(nodes), dtype=float))

    target = reduced_target(fvals)
    rng = np.random.default_rng(opts.seed)
    nfev_total = 0

    warm = None
    if opts.continuation and k >= 6:
        _, y, kc, nf = _sym_continuation(f, k, target_of, opts, rng)
        nfev_total += nf
        if kc < k:           # pad with exactly-canceling growth
            need = (k - kc) // 2
            y, kc = _sym_grow(y, kc, need, opts.variable_t)
        if kc == k:
            phis, times = _sym_expand(y, k, opts.variable_t)
            warm = np.concatenate([phis, times]) if opts.variable_t else phis

    inits = [warm] if warm is not None else []
    mx, x, nf = np.inf, None, 0
    if inits:
        mx, x, nf = _solve_fixed_degree(k, sigmas, target, opts, inits, opts.max_nfev)
        nfev_total += nf
    if mx > opts.target_eps:
        fallback = [np.zeros(k) if not opts.variable_t
                    else np.concatenate([np.zeros(k), np.ones(k)])]
        for _ in range(opts.restarts):
            p0 = rng.uniform(-np.pi, np.pi, k)
            if opts.variable_t:
                fallback.append(np.concatenate([p0, rng.uniform(0.3, 2.0, k)]))
            else:
                fallback.append(p0)
        mx2, x2, nf = _solve_fixed_degree(k, sigmas, target, opts, fallback,
                                          opts.max_nfev)
        nfev_total += nf
        if x is None or mx2 < mx:
            mx, x = mx2, x2

    if opts.variable_t:
        schedule = schedule_from_arrays(x[:k], x[k:])
    else:
        schedule = schedule_from_arrays(x)
    u = reduced_product(schedule, sigmas)
    residuals = _node_residuals(u, target, opts.metric)
    report = SynthesisReport(
        grid=sigmas,
        residual_per_node=residuals,
        max_residual=float(np.max(residuals)),
        target_eps=opts.target_eps,
        iterations=nfev_total,
        converged=bool(np.max(residuals) <= opts.target_eps),
        metric=opts.metric,
    )
    return schedule, report


def synthesize_to_accuracy(f: TargetFunction, eps: float, k_max: int,
                           opts: SolverOptions | None = None):
    """Grow the schedule degree only as far as needed for accuracy eps.

    Runs the symmetric continuation with early stopping and returns
    (PhaseSchedule, SynthesisReport) at the first degree whose residual on
    the stage grid meets eps; the report is evaluated on a fresh 4k grid.
    Falls back to synthesize_schedule at k_max for very low k_max.
    """
    opts = opts or SolverOptions(target_eps=eps)
    opts = replace(opts, target_eps=eps)
    if k_max < 6:
        return synthesize_schedule(f, k_max, opts=opts)

    def target_of(nodes):
        return reduced_target(np.asarray(f(nodes), dtype=float))

    rng = np.random.default_rng(opts.seed)
    mx, y, kc, nfev = _sym_continuation(f, k_max, target_of, opts, rng,
                                        eps_stop=0.8 * eps)
    phis, times = _sym_expand(y, kc, opts.variable_t)
    grid = chebyshev_grid(f.sigma_lo, f.sigma_hi, 4 * kc)
    target = target_of(grid)
    x = np.concatenate([phis, times]) if opts.variable_t else phis
    mx, x, nf = _solve_fixed_degree(kc, grid, target, opts, [x], opts.max_nfev)
    nfev += nf
    if opts.variable_t:
        schedule = schedule_from_arrays(x[:kc], x[kc:])
    else:
        schedule = schedule_from_arrays(x)
    u = reduced_product(schedule, grid)
    residuals = _node_residuals(u, target, opts.metric)
    report = SynthesisReport(
        grid=grid,
        residual_per_node=residuals,
        max_residual=float(np.max(residuals)),
        target_eps=eps,
        iterations=nfev,
        converged=bool(np.max(residuals) <= eps),
        metric=opts.metric,
    )
    return schedule, report


def degree_sweep(f: TargetFunction, ks, grid_size: int | None = None,
                 eval_grid_size: int = 201, opts: SolverOptions | None = None):
    """Synthesize at each degree in ks, chaining warm starts across degrees.

    Residuals are measured on one shared dense evaluation grid so the sweep
    is comparable across degrees.  Each degree is seeded both by the previous
    solution (extended with canceling pairs, which preserves the product) and
    by a fresh symmetric continuation; stalls trigger jittered re-solves.
    Returns a list of (k, max_residual, schedule) sorted as given.
    """
    ks = [int(k) for k in ks]
    opts = opts or SolverOptions(target_eps=0.0)
    opts = replace(opts, target_eps=0.0)    # never stop a sweep point early
    if opts.variable_t:
        raise InvalidInputError("degree_sweep runs in fixed-t mode")
    if grid_size is None:
        grid_size = max(2 * max(ks), 64)
    sigmas = chebyshev_grid(f.sigma_lo, f.sigma_hi, grid_size)
    target = reduced_target(np.asarray(f(sigmas), dtype=float))
    eval_grid = chebyshev_grid(f.sigma_lo, f.sigma_hi, eval_grid_size)
    eval_target = reduced_target(np.asarray(f(eval_grid), dtype=float))

    def target_of(nodes):
        return reduced_target(np.asarray(f(nodes), dtype=float))

    def eval_res(x):
        u = reduced_product(schedule_from_arrays(x), eval_grid)
        return float(np.max(_node_residuals(u, eval_target, opts.metric)))

    rng = np.random.default_rng(opts.seed)
    out = []
    x = None
    prev_res = None
    for k in ks:
        inits = []
        if x is not None and len(x) <= k and (k - len(x)) % 2 == 0:
            pad = list(x)
            while len(pad) < k:
                anchor = pad[-1]
                pad.extend([anchor, anchor + np.pi])
            inits.append(np.asarray(pad))
        _, y, kc, _ = _sym_continuation(f, k, target_of, opts,
                                        np.random.default_rng(opts.seed + 1))
        if kc == k:
            phis, _ = _sym_expand(y, k, False)
            inits.append(phis)
        if not inits:
            inits.append(np.zeros(k))
        _, x, _ = _solve_fixed_degree(k, sigmas, target, opts, inits,
                                      min(opts.max_nfev, 700))
        r = eval_res(x)
        tries = 0
        while prev_res is not None and r >= prev_res and tries < 4 and inits:
            jitter = [inits[0] + rng.normal(0.0, 0.1 * (tries + 1), k)
                      for _ in range(2)]
            _, x2, _ = _solve_fixed_degree(k, sigmas, target, opts, jitter,
                                           opts.max_nfev)
            r2 = eval_res(x2)
            if r2 < r:
                x, r = x2, r2
            tries += 1
        prev_res = r
        out.append((k, r, schedule_from_arrays(x)))
    return out


def validate_residual(schedule: PhaseSchedule, f: TargetFunction,
                      grid_size: int, metric: str = "full") -> float:
    """Max residual on an independent Chebyshev grid of the given size."""
    sigmas = chebyshev_grid(f.sigma_lo, f.sigma_hi, grid_size)
    target = reduced_target(np.asarray(f(sigmas), dtype=float))
    u = reduced_product(schedule, sigmas)
    return float(np.max(_node_residuals(u, target, metric)))


def verify_pq_constraint(schedule: PhaseSchedule, grid) -> float:
    """Max over the grid of | |P-corner|^2 + |Q-corner|^2 - 1 |.

    This is the first-row norm of a unitary, so it is an identity; any
    deviation beyond round-off indicates a broken product.
    """
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    if grid.size == 0:
        return 0.0
    u = reduced_product(schedule, grid)
    row = np.abs(u[:, 0, 0]) ** 2 + np.abs(u[:, 0, 1]) ** 2
    return float(np.max(np.abs(row - 1.0)))


def schedule_cost(schedule: PhaseSchedule) -> tuple[float, int]:
    """(total evolution time, step count)."""
    if schedule.degree == 0:
        return (0.0, 0)
    return (float(np.sum(schedule.times())), schedule.degree)
