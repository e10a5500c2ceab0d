import numpy as np
import pytest

from nuqc import gates, measure
from nuqc.errors import DegenerateBranchError, IrreversibleError, MeasurementError
from nuqc.qstate import StateVector, basis_state, norm_sq, uniform_state


def nand_m1_closed_form(c):
    """Hand-derived failure operator for the measured NAND gate."""
    a = np.sqrt(1.0 - c * c)
    b = np.sqrt(1.0 - c * c / 3.0)
    return np.array(
        [
            [2 + a, -1 + a, -1 + a, 0],
            [-1 + a, 2 + a, -1 + a, 0],
            [-1 + a, -1 + a, 2 + a, 0],
            [0, 0, 0, 3 * b],
        ],
        dtype=complex,
    ) / 3.0


def nand_r0_closed_form(c, q):
    a = np.sqrt(1.0 - c * c)
    b = np.sqrt(1.0 - c * c / 3.0)
    return (q / (3.0 * a)) * np.array(
        [
            [1 + 2 * a, 1 - a, 1 - a, 0],
            [1 - a, 1 + 2 * a, 1 - a, 0],
            [1 - a, 1 - a, 1 + 2 * a, 0],
            [0, 0, 0, 3 * a / b],
        ],
        dtype=complex,
    )


class FixedRng:
    """Deterministic stand-in feeding a scripted uniform sequence."""

    def __init__(self, values):
        self.values = list(values)

    def random(self):
        return self.values.pop(0)


def test_build_pair_completeness():
    for g in (gates.nand(), gates.abrams_lloyd(), gates.n1(0.3)):
        for c in (1.0, 0.8, 0.25):
            pair = measure.build_pair(g, c)
            assert measure.completeness_defect(pair) < 1e-12


def test_build_pair_rejects_bad_strength():
    with pytest.raises(MeasurementError):
        measure.build_pair(gates.nand(), 0.0)
    with pytest.raises(MeasurementError):
        measure.build_pair(gates.nand(), 1.2)


def test_success_operator_is_scaled_gate():
    pair = measure.build_pair(gates.n1(0.5), 0.8)
    assert np.allclose(pair.m0, 0.8 * np.diag([1.0, 0.5]), atol=1e-15)


def test_m1_matches_closed_form():
    for c in (0.6, 0.9):
        pair = measure.build_pair(gates.nand(), c)
        assert np.allclose(pair.m1, nand_m1_closed_form(c), atol=1e-10)


def test_r0_matches_closed_form():
    for c in (0.6, 0.9):
        pair = measure.build_pair(gates.nand(), c)
        policy = measure.build_reversal(pair)
        q = np.sqrt(1.0 - c * c)
        assert abs(policy.q - q) < 1e-12
        assert np.allclose(policy.r0, nand_r0_closed_form(c, q), atol=1e-10)
        # reversal undoes failure up to the factor q
        assert np.allclose(policy.r0 @ pair.m1, q * np.eye(4), atol=1e-9)


def test_reversal_completeness():
    pair = measure.build_pair(gates.nand(), 0.6)
    policy = measure.build_reversal(pair, max_reversals=2)
    defect = policy.r0.conj().T @ policy.r0 + policy.r1.conj().T @ policy.r1
    assert np.allclose(defect, np.eye(4), atol=1e-10)


def test_reversal_strength_bound():
    pair = measure.build_pair(gates.nand(), 0.6)
    # |q| can be at most sqrt(1 - |c|^2) = 0.8
    measure.build_reversal(pair, q=0.8)
    with pytest.raises(MeasurementError):
        measure.build_reversal(pair, q=0.81)
    with pytest.raises(MeasurementError):
        measure.build_reversal(pair, q=0.0)


def test_full_strength_failure_is_irreversible():
    pair = measure.build_pair(gates.nand(), 1.0)
    with pytest.raises(IrreversibleError):
        measure.build_reversal(pair)


def test_success_prob_basis_states():
    for c in (1.0, 0.8, 0.5):
        pair = measure.build_pair(gates.nand(), c)
        for x in range(4):
            p = measure.success_prob(pair, basis_state(2, x), (1, 0))
            assert abs(p - c * c / 3.0) < 1e-12


def test_success_prob_interference():
    pair = measure.build_pair(gates.nand(), 0.7)
    best = StateVector(2, np.array([1, 1, 1, 0]) / np.sqrt(3.0))
    assert abs(measure.success_prob(pair, best, (1, 0)) - 0.49) < 1e-12
    wrong = StateVector(2, np.array([1, -1, 0, 0]) / np.sqrt(2.0))
    assert measure.success_prob(pair, wrong, (1, 0)) < 1e-12


def test_sample_branches_follow_uniform_draw():
    pair = measure.build_pair(gates.nand(), 0.6)
    psi = basis_state(2, 0b11)
    # p_success = 0.12; a draw below lands on the success branch
    outcome, post = measure.sample(pair, psi, (1, 0), FixedRng([0.11]))
    assert outcome == "success"
    assert norm_sq(post) == pytest.approx(1.0, abs=1e-12)
    assert abs(post.amplitudes[0b00]) == pytest.approx(1.0, abs=1e-12)
    outcome, post = measure.sample(pair, psi, (1, 0), FixedRng([0.13]))
    assert outcome == "failure"
    assert norm_sq(post) == pytest.approx(1.0, abs=1e-12)


def test_sample_degenerate_branch_raises():
    pair = measure.build_pair(gates.n1(1e-13), 1.0)
    psi = basis_state(1, 1)
    # success mass is 1e-26: numerically indistinguishable from an impossible
    # branch, so landing on it must abort rather than divide by ~0
    with pytest.raises(DegenerateBranchError):
        measure.sample(pair, psi, (0,), FixedRng([0.0]))


def test_reversal_restores_premeasurement_state():
    pair = measure.build_pair(gates.nand(), 0.6)
    policy = measure.build_reversal(pair)
    rng = np.random.default_rng(5)
    amps = rng.normal(size=4) + 1j * rng.normal(size=4)
    psi = StateVector(2, amps / np.linalg.norm(amps))
    outcome, failed = measure.sample(pair, psi, (1, 0), FixedRng([0.99]))
    assert outcome == "failure"
    outcome, restored = measure.sample_reversal(policy, failed, (1, 0), FixedRng([0.0]))
    assert outcome == "success"
    overlap = abs(np.vdot(restored.amplitudes, psi.amplitudes)) ** 2
    assert overlap == pytest.approx(1.0, abs=1e-10)


def test_run_with_reversal_attempt_accounting():
    pair = measure.build_pair(gates.nand(), 0.6)
    policy = measure.build_reversal(pair, max_reversals=2)
    psi = basis_state(2, 0b11)
    # fail, reverse, fail, reverse, succeed
    res = measure.run_with_reversal(pair, policy, psi, (1, 0),
                                    FixedRng([0.9, 0.0, 0.9, 0.0, 0.0]))
    assert res.outcome == "success"
    assert res.attempts == 3
    assert res.reversals == 2
    # fail then lose the reversal: protocol over, with the reversal spent
    res = measure.run_with_reversal(pair, policy, psi, (1, 0), FixedRng([0.9, 0.99]))
    assert res.outcome == "failure"
    assert res.attempts == 1
    assert res.reversals == 1


def test_analytic_success_zero_reversals_is_plain_probability():
    pair = measure.build_pair(gates.nand(), 0.6)
    psi = uniform_state(2)
    base = measure.success_prob(pair, psi, (1, 0))
    assert measure.analytic_success(pair, psi, (1, 0), None) == pytest.approx(base)


def test_analytic_success_geometric_series():
    c = 0.6
    pair = measure.build_pair(gates.nand(), c)
    psi = basis_state(2, 0b01)
    q_sq = 1.0 - c * c
    for k in (0, 1, 2, 5):
        policy = measure.build_reversal(pair, max_reversals=k)
        want = (c * c / 3.0) * (1.0 - q_sq ** (k + 1)) / (1.0 - q_sq)
        got = measure.analytic_success(pair, psi, (1, 0), policy)
        assert abs(got - want) < 1e-12


def test_empirical_rate_matches_analytic():
    pair = measure.build_pair(gates.nand(), 0.6)
    policy = measure.build_reversal(pair, max_reversals=3)
    psi = basis_state(2, 0b11)
    rng = np.random.default_rng(11)
    trials = 20000
    hits = sum(
        measure.run_with_reversal(pair, policy, psi, (1, 0), rng).outcome == "success"
        for _ in range(trials)
    )
    p = measure.analytic_success(pair, psi, (1, 0), policy)
    sigma = np.sqrt(p * (1.0 - p) / trials)
    assert abs(hits / trials - p) < 4.0 * sigma
