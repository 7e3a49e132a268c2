import math

import numpy as np
import pytest

from hsvt import compiler, targets
from hsvt.compiler import PhaseSchedule, PhaseStep, SolverOptions
from hsvt.errors import InvalidInputError, ParseError


def make_schedule(rng, k, variable_t=False):
    phis = rng.uniform(-np.pi, np.pi, k)
    times = rng.uniform(0.3, 2.0, k) if variable_t else None
    return compiler.schedule_from_arrays(phis, times)


# -- steps and serialization -------------------------------------------------

def test_phase_step_wraps_phase():
    assert PhaseStep(phi=3 * np.pi, t=1.0).phi == pytest.approx(np.pi)
    assert PhaseStep(phi=-np.pi, t=1.0).phi == pytest.approx(np.pi)


def test_phase_step_rejects_nonpositive_time():
    with pytest.raises(InvalidInputError):
        PhaseStep(phi=0.0, t=0.0)


def test_schedule_text_roundtrip(rng):
    sch = make_schedule(rng, 7, variable_t=True)
    back = PhaseSchedule.from_text(sch.to_text())
    assert back.degree == 7
    assert np.array_equal(back.phis(), sch.phis())
    assert np.array_equal(back.times(), sch.times())
    assert back.convention == sch.convention


def test_schedule_parse_errors():
    with pytest.raises(ParseError, match="header"):
        PhaseSchedule.from_text("1.0,1.0\n")
    with pytest.raises(ParseError, match="k="):
        PhaseSchedule.from_text("# hsvt-schedule v1 k=2 convention=c\n0.1,1\n")
    with pytest.raises(ParseError, match="bad number"):
        PhaseSchedule.from_text("# hsvt-schedule v1 k=1 convention=c\nx,1\n")
    with pytest.raises(ParseError, match="positive"):
        PhaseSchedule.from_text("# hsvt-schedule v1 k=1 convention=c\n0.1,-1\n")


def test_empty_schedule_roundtrip():
    sch = PhaseSchedule(steps=())
    assert PhaseSchedule.from_text(sch.to_text()).degree == 0


# -- reduced model -----------------------------------------------------------

def test_reduced_model_empty_schedule():
    u = compiler.reduced_model(PhaseSchedule(steps=()), 0.5)
    assert np.array_equal(u.matrix, np.eye(2))


def test_reduced_model_single_step_closed_form():
    sch = compiler.schedule_from_arrays([0.0])
    u = compiler.reduced_model(sch, 0.5).matrix
    c, s = math.cos(0.5), math.sin(0.5)
    want = np.array([[c, -1j * s], [-1j * s, c]])
    assert np.linalg.norm(u - want, 2) < 1e-14


def test_reduced_model_identity_at_sigma_zero(rng):
    sch = make_schedule(rng, 6, variable_t=True)
    u = compiler.reduced_model(sch, 0.0).matrix
    assert np.linalg.norm(u - np.eye(2), 2) < 1e-14


def test_reduced_model_unitary_and_unimodular(rng):
    sch = make_schedule(rng, 5)
    u = compiler.reduced_model(sch, 0.7).matrix
    assert np.linalg.norm(u.conj().T @ u - np.eye(2), 2) < 1e-12
    assert abs(abs(np.linalg.det(u)) - 1) < 1e-12


def test_corner_parity_polynomial_structure(rng):
    # With all t = 1 the upper-left corner is a degree-k polynomial in
    # x = cos(sigma) with parity k mod 2, and the upper-right corner is
    # -i sin(sigma) times a degree-(k-1) polynomial of the opposite parity.
    for k in (3, 4, 6):
        sch = compiler.schedule_from_arrays(rng.uniform(-np.pi, np.pi, k))
        nodes = np.cos(np.pi * (2 * np.arange(k + 2) + 1) / (2 * (k + 2)))
        u = compiler.reduced_product(sch, np.arccos(nodes))
        cp = np.polynomial.chebyshev.chebfit(nodes, u[:, 0, 0], k + 1)
        assert abs(cp[k + 1]) < 1e-8
        assert np.max(np.abs(cp[1 - (k % 2)::2])) < 1e-8
        q = u[:, 0, 1] / (-1j * np.sin(np.arccos(nodes)))
        cq = np.polynomial.chebyshev.chebfit(nodes, q, k + 1)
        assert np.max(np.abs(cq[k:])) < 1e-8
        assert np.max(np.abs(cq[k % 2::2])) < 1e-8


# -- pq constraint and cost --------------------------------------------------

def test_pq_constraint_empty_and_single(rng):
    assert compiler.verify_pq_constraint(PhaseSchedule(steps=()), [0.3]) == 0.0
    one = compiler.schedule_from_arrays([1.1], [0.6])
    assert compiler.verify_pq_constraint(one, np.linspace(0, 1, 20)) < 1e-12


def test_pq_constraint_random(rng):
    sch = make_schedule(rng, 5, variable_t=True)
    grid = np.linspace(0.0, 1.0, 50)
    assert compiler.verify_pq_constraint(sch, grid) < 1e-10


def test_schedule_cost():
    assert compiler.schedule_cost(PhaseSchedule(steps=())) == (0.0, 0)
    sch = compiler.schedule_from_arrays(np.zeros(4))
    assert compiler.schedule_cost(sch) == (4.0, 4)


# -- synthesis ---------------------------------------------------------------

def test_synthesize_sine_single_step_corner():
    f = targets.sine(0.3, 0.8)
    opts = SolverOptions(metric="corner", target_eps=1e-10, restarts=4)
    sch, rep = compiler.synthesize_schedule(f, 1, grid_size=8, opts=opts)
    assert rep.converged
    assert rep.max_residual < 1e-10
    assert sch.steps[0].phi == pytest.approx(np.pi)
    assert sch.steps[0].t == pytest.approx(1.0, abs=1e-6)


def test_synthesize_zero_target_corner():
    # f == 0: a near-zero-time step makes the product diagonal
    f = targets.scaled_power(1, 0.0, 0.3, 0.8)
    opts = SolverOptions(metric="corner", target_eps=1e-10, variable_t=True,
                         restarts=4, t_min=1e-11)
    _, rep = compiler.synthesize_schedule(f, 1, grid_size=8, opts=opts)
    # the solver keeps t bounded away from zero, so a small floor remains
    assert rep.max_residual < 1e-8


def test_synthesize_identity_converges():
    f = targets.identity(float(np.arccos(0.9)), 0.95)
    opts = SolverOptions(target_eps=5e-3, seed=0)
    sch, rep = compiler.synthesize_schedule(f, 24, opts=opts)
    assert rep.converged
    assert rep.max_residual <= 5e-3
    # residual reproduced on an independent denser grid
    dense = compiler.validate_residual(sch, f, 10 * 24)
    assert dense <= 2 * max(rep.max_residual, 1e-12)


def test_synthesize_report_consistency():
    f = targets.identity(0.3, 0.8)
    _, rep = compiler.synthesize_schedule(f, 8, opts=SolverOptions(seed=3))
    assert rep.max_residual == pytest.approx(np.max(rep.residual_per_node))
    assert len(rep.grid) == len(rep.residual_per_node)


def test_synthesize_deterministic_given_seed():
    f = targets.identity(0.3, 0.8)
    opts = SolverOptions(target_eps=1e-3, seed=11)
    s1, _ = compiler.synthesize_schedule(f, 10, opts=opts)
    s2, _ = compiler.synthesize_schedule(f, 10, opts=opts)
    assert s1.to_text() == s2.to_text()


def test_synthesize_rejects_bad_args():
    f = targets.identity(0.3, 0.8)
    with pytest.raises(InvalidInputError):
        compiler.synthesize_schedule(f, 0)
    with pytest.raises(InvalidInputError):
        compiler.synthesize_schedule(f, 4, grid_size=7)


def test_synthesize_to_accuracy_stops_early():
    f = targets.identity(0.35, 0.8)
    opts = SolverOptions(target_eps=1e-2, variable_t=True, seed=0)
    sch, rep = compiler.synthesize_to_accuracy(f, 1e-2, k_max=40, opts=opts)
    assert rep.converged
    assert sch.degree < 40


def test_variable_t_synthesis_wide_domain():
    f = targets.identity(0.2, 0.85)
    opts = SolverOptions(target_eps=1e-2, variable_t=True, seed=0)
    sch, rep = compiler.synthesize_to_accuracy(f, 1e-2, k_max=40, opts=opts)
    assert rep.converged
    assert np.all(sch.times() > 0)


def test_degree_sweep_decreasing():
    f = targets.identity(0.35, 0.8)
    rows = compiler.degree_sweep(f, [4, 8, 12, 16], opts=SolverOptions(seed=0))
    residuals = [r for _, r, _ in rows]
    assert all(b < a for a, b in zip(residuals, residuals[1:]))
