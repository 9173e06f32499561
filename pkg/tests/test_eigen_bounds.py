import numpy as np
import pytest

from bianchi_lab import (
    ConstantFractions,
    Convention,
    Direction,
    ExtremalMax,
    ExtremalMin,
    Factor,
    MetricState,
    PiecewiseRandom,
    TheoremBoundParams,
    check_monotone,
    detect_tau,
    e11_constants,
    envelope_integrate,
    integrate,
    monotone_quantity,
    reaction_coefficients,
    ricci_components,
    sample_initial_states,
    synth_lambda,
    theorem_bounds,
)
from bianchi_lab.eigen_bounds import coefficients_along
from bianchi_lab.errors import (
    ClassMismatchError,
    ParameterError,
    PolicyError,
    PreconditionError,
    QuadratureError,
    TimeRangeError,
)

UNIT = MetricState(1.0, 1.0, 1.0)


@pytest.mark.parametrize("convention", list(Convention))
def test_einstein_point_coefficients_vanish(convention):
    coeff = reaction_coefficients(UNIT, ricci_components("su2", UNIT), convention)
    assert coeff.c_lo == pytest.approx(0.0, abs=1e-15)
    assert coeff.c_hi == pytest.approx(0.0, abs=1e-15)


def test_heisenberg_unit_coefficients():
    coeff = reaction_coefficients(UNIT, ricci_components("heisenberg", UNIT))
    assert coeff.c_lo == pytest.approx(-2.0 / 3.0)
    assert coeff.c_hi == pytest.approx(4.0 / 3.0)
    # smallest index wins the tie between r22 and r33
    assert (coeff.argmin, coeff.argmax) == (1, 0)


def test_heisenberg_hand_coefficients():
    state = MetricState(2.0, 1.0, 0.5)
    coeff = reaction_coefficients(state, ricci_components("heisenberg", state))
    assert coeff.c_lo == pytest.approx(-8.0 / 3.0)
    assert coeff.c_hi == pytest.approx(28.0 / 3.0)


def test_conventions_differ_off_identity():
    state = MetricState(2.0, 1.0, 0.5)
    curv = ricci_components("heisenberg", state)
    lit = reaction_coefficients(state, curv, "component")
    endo = reaction_coefficients(state, curv, "endomorphism")
    assert endo.c_hi == pytest.approx(2 * 2.0 + 4.0 / 3.0)
    assert lit.c_hi != endo.c_hi


def test_constant_coefficient_envelope():
    traj = integrate("su2", UNIT, 5.0)
    env = envelope_integrate(traj, 1.0, 2.5)
    assert env.t[0] == 1.0
    assert np.all(env.lower == 2.5) and np.all(env.upper == 2.5)


def test_envelope_anchor_and_order():
    traj = integrate("sl2r", sample_initial_states("sl2r", 1, seed=4)[0], 10.0)
    env = envelope_integrate(traj, 2.0, 3.0)
    assert env.lower[0] == env.upper[0] == 3.0
    assert env.L(2.0) == pytest.approx(3.0, rel=1e-14)
    assert np.all(env.lower <= env.upper)
    assert env.L(env.t[50]) == pytest.approx(env.lower[50], rel=1e-14)


def test_heisenberg_envelope_matches_exact_integrals():
    start = MetricState(1.3, 1.1, 1 / 1.43)
    traj = integrate("heisenberg", start, 60.0)
    env = envelope_integrate(traj, 0.0, 1.0)
    s = 1 + 8.0 / 3.0 * start.a**2 * env.t
    lower = s**0.125 * np.exp(-1.5 * start.b * (s**0.25 - 1))
    upper = s**0.125 * np.exp(-0.75 * start.a * (s**-0.5 - 1))
    assert np.max(np.abs(env.lower / lower - 1)) <= 1e-6
    assert np.max(np.abs(env.upper / upper - 1)) <= 1e-6
    bounds = theorem_bounds(TheoremBoundParams.from_trajectory(traj, 0.0), env.t)
    assert np.allclose(bounds.lo, lower, rtol=1e-13)
    assert np.allclose(bounds.hi, upper, rtol=1e-13)


def test_heisenberg_printed_upper_is_smaller_than_envelope():
    traj = integrate("heisenberg", UNIT, 20.0)
    env = envelope_integrate(traj, 0.0)
    printed = theorem_bounds(TheoremBoundParams.from_trajectory(traj, 0.0), env.t,
                             as_printed=True)
    assert np.all(printed.hi[1:] < env.upper[1:])


def test_anchor_outside_span_rejected():
    traj = integrate("su2", UNIT, 1.0)
    with pytest.raises(TimeRangeError):
        envelope_integrate(traj, 2.0)
    with pytest.raises(ParameterError):
        envelope_integrate(traj, 0.5, -1.0)


@pytest.mark.parametrize("name", ["su2", "sl2r", "heisenberg", "e11", "e2"])
def test_bounds_collapse_at_tau(name):
    traj = integrate(name, sample_initial_states(name, 1, seed=2)[0], 5.0)
    params = TheoremBoundParams.from_trajectory(traj, 0.5, 1.7)
    lo, hi = theorem_bounds(params, 0.5)
    assert lo == pytest.approx(1.7, rel=1e-14)
    assert hi == pytest.approx(1.7, rel=1e-14)


def test_sl2r_hand_values():
    params = TheoremBoundParams("sl2r", 0.0, 1.0, UNIT, k=10.0 / 3.0)
    lo, hi = theorem_bounds(params, 3.0)
    assert lo == pytest.approx(np.exp(-6.0), rel=1e-14)
    assert lo == pytest.approx(2.4788e-3, rel=1e-4)
    assert hi == pytest.approx(27.0, rel=1e-14)


def test_su2_lower_bound_limit():
    start = MetricState(1.5, 1.0, 2.0 / 3.0)
    params = TheoremBoundParams("su2", 0.2, 1.0, start)
    lo, _ = theorem_bounds(params, 500.0)
    a0, c0 = start.a, start.c
    assert lo == pytest.approx(np.exp(-2 * (a0 - c0) / c0**2 * np.exp(-2 * c0**2 * 0.2)))
    assert lo > 0


def test_bound_params_validation():
    with pytest.raises(ParameterError):
        TheoremBoundParams("euclidean3", 0.0, 1.0, UNIT)
    with pytest.raises(ParameterError):
        TheoremBoundParams("e11", 1.0, 1.0, UNIT)
    with pytest.raises(ParameterError):
        TheoremBoundParams("e11", 0.0, 1.0, UNIT, c1=1.0, c2=1.0)
    with pytest.raises(ParameterError):
        TheoremBoundParams("sl2r", 0.0, 1.0, UNIT)
    with pytest.raises(ParameterError):
        TheoremBoundParams("su2", 0.0, 1.0, UNIT, k=1.0)
    with pytest.raises(PreconditionError):
        theorem_bounds(TheoremBoundParams("su2", 0.0, 1.0, MetricState(0.5, 1.0, 2.0)), 1.0)
    with pytest.raises(TimeRangeError):
        theorem_bounds(TheoremBoundParams("su2", 1.0, 1.0, UNIT), 0.5)


def test_e11_constants_symmetric_start():
    start = MetricState(1.0, 1.0, 1.0)
    traj = integrate("e11", start, 30.0)
    consts = e11_constants(traj, 0.5)
    a, b, _ = traj.y
    i0 = traj.index_from(0.5)
    expected = np.max(traj.t[i0:] ** 2 * (a + b)[i0:] ** 2 / 3.0)
    assert consts.c1 == pytest.approx(expected, rel=1e-12)
    assert np.isfinite(consts.c1) and consts.c2 >= 0


def test_e11_constants_single_point():
    traj = integrate("e11", sample_initial_states("e11", 1, seed=0)[0], 2.0)
    consts = e11_constants(traj, 2.0)
    a, b, c = traj.y[:, -1]
    s2 = (a + b) ** 2
    assert consts.c2 == pytest.approx(2.0 * max(0.0, c * s2 - s2 / 3.0))


def test_e11_constants_class_check():
    with pytest.raises(ClassMismatchError):
        e11_constants(integrate("su2", UNIT, 1.0), 0.5)


@pytest.mark.parametrize("name", ["su2", "e11"])
def test_extremal_policies_saturate(name):
    traj = integrate(name, sample_initial_states(name, 1, seed=6)[0], 10.0)
    env = envelope_integrate(traj, 0.3)
    lo = synth_lambda(traj, ExtremalMin(), 0.3)
    hi = synth_lambda(traj, ExtremalMax(), 0.3)
    assert np.max(np.abs(lo.values / env.lower - 1)) <= 1e-9
    assert np.max(np.abs(hi.values / env.upper - 1)) <= 1e-9


def test_uniform_fractions_at_einstein_point():
    traj = integrate("su2", UNIT, 5.0)
    lam = synth_lambda(traj, ConstantFractions((1 / 3, 1 / 3, 1 / 3)), 0.0, 2.0)
    assert np.allclose(lam.values, 2.0, rtol=1e-14)


def test_piecewise_random_is_admissible_and_seeded():
    traj = integrate("e2", sample_initial_states("e2", 1, seed=3)[0], 10.0)
    first = synth_lambda(traj, PiecewiseRandom(11, 0.5), 0.0)
    again = synth_lambda(traj, PiecewiseRandom(11, 0.5), 0.0)
    other = synth_lambda(traj, PiecewiseRandom(12, 0.5), 0.0)
    assert np.array_equal(first.values, again.values)
    assert not np.array_equal(first.values, other.values)
    assert np.allclose(first.fractions.sum(axis=0), 1.0)
    assert np.all(first.fractions >= 0)


def test_piecewise_random_solves_the_dynamics():
    traj = integrate("sl2r", sample_initial_states("sl2r", 1, seed=3)[0], 6.0)
    lam = synth_lambda(traj, PiecewiseRandom(5, 2.0), 0.0)
    # inside one switching interval the log-derivative is 2 f.q - (2/3) R
    t = np.linspace(0.5, 1.5, 5)
    _, _, q, scalar = coefficients_along(traj, "component", t)
    f = lam.fractions[:, 100][:, None]
    rate = 2 * np.sum(f * q, axis=0) - 2.0 / 3.0 * scalar
    h = 1e-5
    numeric = (np.log(lam(t + h)) - np.log(lam(t - h))) / (2 * h)
    assert np.allclose(numeric, rate, rtol=1e-6, atol=1e-8)


@pytest.mark.parametrize("weights", [(0.5, 0.5), (0.7, 0.7, -0.4), (0.2, 0.2, 0.2)])
def test_constant_fractions_validation(weights):
    with pytest.raises(PolicyError):
        ConstantFractions(weights)


def test_unknown_policy_rejected():
    with pytest.raises(PolicyError):
        synth_lambda(integrate("su2", UNIT, 1.0), object(), 0.0)


def test_min_factor_of_extremal_min_is_constant():
    traj = integrate("sl2r", sample_initial_states("sl2r", 1, seed=8)[0], 20.0)
    lam = synth_lambda(traj, ExtremalMin(), 1.0, 2.0)
    m = monotone_quantity(traj, lam, 1.0, Factor.MinFactor)
    assert np.allclose(m.values, 2.0, rtol=1e-8)


def test_cross_factors_are_monotone():
    traj = integrate("su2", sample_initial_states("su2", 1, seed=8)[0], 20.0)
    tau = detect_tau("su2", traj).tau
    hi = synth_lambda(traj, ExtremalMax(), tau)
    lo = synth_lambda(traj, ExtremalMin(), tau)
    up = monotone_quantity(traj, hi, tau, Factor.MinFactor)
    down = monotone_quantity(traj, lo, tau, Factor.MaxFactor)
    assert check_monotone(up, Direction.NonDecreasing).passed
    assert check_monotone(down, Direction.NonIncreasing).passed


def test_quadrature_guard_trips_on_kinks():
    # before tau the ordering of the q_i changes, so min q has kinks
    traj = integrate("su2", MetricState(4.0, 1.0, 0.5).normalized(), 20.0)
    lam = synth_lambda(traj, ExtremalMax(), 0.0)
    with pytest.raises(QuadratureError):
        monotone_quantity(traj, lam, 0.0, Factor.MinFactor)


@pytest.mark.parametrize("name", ["su2", "sl2r", "heisenberg", "e11", "e2"])
def test_endomorphism_containment(name):
    traj = integrate(name, sample_initial_states(name, 1, seed=12)[0], 20.0)
    tau = detect_tau(name, traj, "endomorphism").tau
    env = envelope_integrate(traj, tau, 1.0, "endomorphism")
    assert np.all(env.lower > 0)
    for seed in range(200):
        lam = synth_lambda(traj, PiecewiseRandom(seed, 0.5), tau, 1.0, "endomorphism")
        eps = 1e-8 * env.upper
        assert np.all(lam.values >= env.lower - eps) and np.all(lam.values <= env.upper + eps)
