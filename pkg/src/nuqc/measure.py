"""Two-outcome measurements that realize nonunitary gates, plus reversal.

A gate N scaled so its largest singular value is 1 becomes the success
operator M0 = c N of a generalized measurement; the failure operator is
M1 = sqrt(I - M0^dag M0), so M0^dag M0 + M1^dag M1 = I.  Success occurs with
probability |c|^2 <psi|N^dag N|psi> and leaves the register in the state N
would have produced.

After a failure the register can be measured again with the reversing pair
R0 = q M1^{-1}, R1 = sqrt(I - R0^dag R0), legal for 0 < |q| <= sqrt(1-|c|^2).
An R0 outcome restores the pre-measurement state exactly, so the main
measurement can simply be retried; chaining up to k reversals raises the
overall success probability to p * (1-|q|^(2k+2)) / (1-|q|^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DegenerateBranchError, IrreversibleError, MeasurementError
from .gates import GateSpec
from .linops import adjoint, max_abs, sqrtm_psd
from .qstate import StateVector, apply_embedded, norm_sq, normalize

SUCCESS = "success"
FAILURE = "failure"

COMPLETENESS_ATOL = 1e-9

# Eigenvalues of M1 below this cannot be inverted trustworthily.
INVERSION_FLOOR = 1e-12

# A sampled branch with less probability mass than this is numerical noise.
DEGENERATE_MASS = 1e-12

_STRENGTH_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class MeasurementPair:
    """Success/failure operator pair realizing ``gate`` at strength ``c``."""

    gate: GateSpec
    c: complex
    m0: np.ndarray
    m1: np.ndarray


@dataclass(frozen=True, eq=False)
class ReversalPolicy:
    """Reversing pair plus the retry budget ``max_reversals``."""

    q: complex
    max_reversals: int
    r0: np.ndarray
    r1: np.ndarray


class ProtocolResult(NamedTuple):
    outcome: str
    state: StateVector
    attempts: int
    reversals: int


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.complex128)
    a.flags.writeable = False
    return a


def build_pair(gate: GateSpec, c: complex = 1.0) -> MeasurementPair:
    """Construct the measurement operators for ``gate`` at strength ``c``."""
    c = complex(c)
    mag = abs(c)
    if mag > 1.0 + _STRENGTH_SLACK:
        raise MeasurementError(f"|c| must not exceed 1, got {mag!r}")
    if mag <= _STRENGTH_SLACK:
        raise MeasurementError("c = 0 leaves the gate with zero success probability")
    m0 = c * gate.matrix
    eye = np.eye(m0.shape[0], dtype=np.complex128)
    m1 = sqrtm_psd(eye - adjoint(m0) @ m0)
    return MeasurementPair(gate=gate, c=c, m0=_frozen(m0), m1=_frozen(m1))


def success_prob(pair: MeasurementPair, state: StateVector, targets: Sequence[int]) -> float:
    """Single-attempt success probability on ``state``."""
    return norm_sq(apply_embedded(state, pair.m0, targets))


def _sample_two_outcome(op_success, op_failure, state, targets, rng) -> tuple[str, StateVector]:
    kept = apply_embedded(state, op_success, targets)
    p = norm_sq(kept)
    if rng.random() < p:
        branch, mass = kept, p
        outcome = SUCCESS
    else:
        branch = apply_embedded(state, op_failure, targets)
        mass = norm_sq(branch)
        outcome = FAILURE
    if mass < DEGENERATE_MASS:
        raise DegenerateBranchError(
            f"sampled {outcome} branch carries probability {mass:.3e}"
        )
    return outcome, normalize(branch)


def sample(pair: MeasurementPair, state: StateVector, targets: Sequence[int],
           rng: np.random.Generator) -> tuple[str, StateVector]:
    """Draw one outcome; consumes exactly one uniform variate from ``rng``."""
    return _sample_two_outcome(pair.m0, pair.m1, state, targets, rng)


def build_reversal(pair: MeasurementPair, q: complex | None = None,
                   max_reversals: int = 0) -> ReversalPolicy:
    """Construct the reversing measurement for ``pair``.

    ``q`` defaults to its optimum sqrt(1 - |c|^2), which makes the reversal
    succeed with certainty.  Raises ``IrreversibleError`` at |c| = 1 and
    ``MeasurementError`` when ``q`` violates its bound.
    """
    if max_reversals < 0:
        raise MeasurementError(f"max_reversals must be >= 0, got {max_reversals}")
    c_mag = abs(pair.c)
    bound_sq = 1.0 - c_mag * c_mag
    if bound_sq <= _STRENGTH_SLACK:
        raise IrreversibleError("|c| = 1 leaves a singular failure operator; nothing to reverse")
    bound = math.sqrt(bound_sq)
    if q is None:
        q = bound
    q = complex(q)
    q_mag = abs(q)
    if q_mag <= _STRENGTH_SLACK:
        raise MeasurementError("q = 0 leaves the reversal with zero success probability")
    if q_mag > bound + _STRENGTH_SLACK:
        raise MeasurementError(
            f"|q| = {q_mag!r} exceeds the reversal bound sqrt(1-|c|^2) = {bound!r}"
        )
    w, v = np.linalg.eigh(pair.m1)
    if w.min() < INVERSION_FLOOR:
        raise IrreversibleError(
            f"failure operator has eigenvalue {w.min():.3e}; inverse is untrustworthy"
        )
    m1_inv = (v / w) @ v.conj().T
    r0 = q * m1_inv
    eye = np.eye(r0.shape[0], dtype=np.complex128)
    r1 = sqrtm_psd(eye - adjoint(r0) @ r0)
    return ReversalPolicy(q=q, max_reversals=int(max_reversals),
                          r0=_frozen(r0), r1=_frozen(r1))


def sample_reversal(policy: ReversalPolicy, state: StateVector, targets: Sequence[int],
                    rng: np.random.Generator) -> tuple[str, StateVector]:
    """Draw one reversing-measurement outcome after a failure."""
    return _sample_two_outcome(policy.r0, policy.r1, state, targets, rng)


def run_with_reversal(pair: MeasurementPair, policy: ReversalPolicy | None,
                      state: StateVector, targets: Sequence[int],
                      rng: np.random.Generator) -> ProtocolResult:
    """Attempt the gate, reversing failures until the budget runs out.

    ``attempts`` counts main-measurement samples, ``reversals`` counts
    reversing samples.  The returned state is the post-measurement state of
    whichever branch ended the protocol.
    """
    budget = policy.max_reversals if policy is not None else 0
    current = state
    attempts = 0
    reversals = 0
    while True:
        attempts += 1
        outcome, post = sample(pair, current, targets, rng)
        if outcome == SUCCESS:
            return ProtocolResult(SUCCESS, post, attempts, reversals)
        if policy is None or reversals >= budget:
            return ProtocolResult(FAILURE, post, attempts, reversals)
        reversals += 1
        r_outcome, r_post = sample_reversal(policy, post, targets, rng)
        if r_outcome == FAILURE:
            return ProtocolResult(FAILURE, r_post, attempts, reversals)
        current = r_post


def analytic_success(pair: MeasurementPair, state: StateVector, targets: Sequence[int],
                     policy: ReversalPolicy | None = None) -> float:
    """Overall protocol success probability, including budgeted reversals.

    With k allowed reversals the single-attempt probability p grows to
    p * (1 - |q|^(2k+2)) / (1 - |q|^2); at the optimal q this approaches the
    strength-1 probability as k grows.
    """
    p = success_prob(pair, state, targets)
    if policy is None or policy.max_reversals == 0:
        return p
    q_sq = abs(policy.q) ** 2
    k = policy.max_reversals
    return p * (1.0 - q_sq ** (k + 1)) / (1.0 - q_sq)


def completeness_defect(pair: MeasurementPair) -> float:
    """Max-norm residual of M0^dag M0 + M1^dag M1 - I."""
    eye = np.eye(pair.m0.shape[0])
    return max_abs(adjoint(pair.m0) @ pair.m0 + adjoint(pair.m1) @ pair.m1 - eye)
