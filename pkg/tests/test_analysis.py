import numpy as np
import pytest

from bianchi_lab import (
    Direction,
    LemmaId,
    MetricState,
    Series,
    check_monotone,
    detect_tau,
    integrate,
    sample_initial_states,
    verify_lemma,
)
from bianchi_lab.errors import (
    ClassMismatchError,
    DegenerateInputError,
    NoTauError,
    ParameterError,
    PreconditionError,
)

UNIT = MetricState(1.0, 1.0, 1.0)


def test_su2_einstein_point_tau_zero():
    cert = detect_tau("su2", integrate("su2", UNIT, 5.0))
    assert cert.tau == 0.0 and cert.holds_to_end
    assert all(p.min_margin == 0.0 for p in cert.predicates)


@pytest.mark.parametrize("seed", range(4))
def test_heisenberg_tau_zero(seed):
    start = sample_initial_states("heisenberg", 1, seed=seed)[0]
    assert detect_tau("heisenberg", integrate("heisenberg", start, 10.0)).tau == 0.0


def test_tau_is_latest_predicate_start():
    start = MetricState(4.0, 1.0, 0.5).normalized()
    cert = detect_tau("su2", integrate("su2", start, 20.0))
    assert cert.tau == max(p.first_satisfied for p in cert.predicates)
    assert cert.tau > 0
    assert all(p.min_margin >= -1e-8 for p in cert.predicates)


def test_relaxations_only_delay_tau():
    start = sample_initial_states("sl2r", 1, seed=1)[0]
    traj = integrate("sl2r", start, 30.0)
    plain = detect_tau("sl2r", traj)
    relaxed = detect_tau("sl2r", traj, with_relaxations=True)
    assert relaxed.tau >= plain.tau
    assert len(relaxed.predicates) > len(plain.predicates)


def test_e11_tau_missing_when_a_below_b():
    # A < B is preserved by the flow, so R11 >= R22 never holds
    traj = integrate("e11", MetricState(1.0, 2.0, 0.5), 5.0)
    with pytest.raises(NoTauError):
        detect_tau("e11", traj)


def test_tau_class_checks():
    traj = integrate("su2", UNIT, 1.0)
    with pytest.raises(ClassMismatchError):
        detect_tau("e2", traj)
    with pytest.raises(ParameterError):
        detect_tau("euclidean3", integrate("euclidean3", UNIT, 1.0))


def test_lemma_4_1_at_fixed_point():
    report = verify_lemma(LemmaId.L4_1, integrate("su2", UNIT, 5.0))
    assert report.passed
    decay = [c for c in report.clauses if c.claim.startswith("(1) A - C")][0]
    assert decay.worst_slack == 0.0


def test_lemma_8_1_decay_has_positive_slack():
    start = MetricState(1.5, 1.0, 1 / 1.5)
    report = verify_lemma("L8_1", integrate("e2", start, 10.0))
    decay = [c for c in report.clauses if "exp(-4" in c.claim][0]
    assert decay.passed
    traj = integrate("e2", start, 10.0)
    a, b, _ = traj.y
    bound = (start.a - start.b) * np.exp(-4 * start.b**2 * traj.t)
    slack = bound - (a - b)
    # strictly positive until both sides sink into integration noise
    visible = bound > 1e-8
    visible[0] = False
    assert visible.sum() > 100
    assert np.all(slack[visible] > 0)


def test_lemma_7_1_symmetric_start_keeps_a_equal_b():
    traj = integrate("e11", MetricState(1.0, 1.0, 1.0), 20.0)
    report = verify_lemma("L7_1", traj)
    diff = {c.claim: c for c in report.clauses if "A - B" in c.claim}
    assert all(abs(c.worst_slack) <= 1e-12 for c in diff.values())
    assert np.max(np.abs(traj.y[0] - traj.y[1])) <= 1e-12


def test_lemma_7_1_sum_upper_bound_is_violated():
    # A + B decays like t^(-1/2), faster bound t^(-1) cannot hold for long
    report = verify_lemma("L7_1", integrate("e11", MetricState(1.2, 1.0, 1 / 1.2), 50.0))
    failed = [c.claim for c in report.failed()]
    assert failed == ["(2) A + B <= (A0 + B0)(1 + 8/3 B0^2 t)^-1"]


def test_lemma_5_1_shifted_clauses_pass():
    start = sample_initial_states("sl2r", 1, seed=2)[0]
    report = verify_lemma("L5_1", integrate("sl2r", start, 50.0))
    assert report.passed
    assert any(c.claim.startswith("(3)") for c in report.clauses)


def test_lemma_checks():
    with pytest.raises(ClassMismatchError):
        verify_lemma("L4_1", integrate("e2", UNIT, 1.0))
    with pytest.raises(PreconditionError):
        verify_lemma("L4_1", integrate("su2", MetricState(0.5, 1.0, 2.0), 1.0))


def test_lemma_report_pass_is_conjunction():
    report = verify_lemma("L4_1", integrate("su2", MetricState(1.5, 1.0, 2 / 3), 20.0))
    assert report.passed == all(c.worst_slack >= -report.tolerance for c in report.clauses)


def test_lemma_id_for_class():
    assert LemmaId.for_class("sl2r") is LemmaId.L5_1
    assert LemmaId.for_class("heisenberg") is None


def test_monotone_constant_series():
    t = np.linspace(0.0, 1.0, 11)
    series = Series(t, np.full_like(t, 3.0))
    assert check_monotone(series, Direction.NonDecreasing).passed
    assert check_monotone(series, Direction.NonIncreasing).passed


def test_monotone_decay_series():
    t = np.linspace(0.0, 5.0, 51)
    series = Series(t, np.exp(-t))
    assert check_monotone(series, "NonIncreasing").passed
    result = check_monotone(series, Direction.NonDecreasing)
    assert not result.passed and result.first_violation == t[1]


def test_monotone_slack_absorbs_roundoff():
    t = np.arange(3.0)
    assert check_monotone((t, [1.0, 1.0 - 1e-12, 1.0]), Direction.NonDecreasing).passed
    assert not check_monotone((t, [1.0, 1.0 - 1e-6, 1.0]), Direction.NonDecreasing).passed


def test_monotone_needs_two_samples():
    with pytest.raises(DegenerateInputError):
        check_monotone(([0.0], [1.0]), Direction.NonDecreasing)
