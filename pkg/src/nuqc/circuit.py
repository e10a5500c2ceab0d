"""Circuit programs over measured gates: parsing, branch tracking, sampling.

A program is a register width, an initial state, and a list of gate steps.
Unitary steps at full strength apply deterministically; everything else runs
as a two-outcome measurement, optionally wrapped in the reversal protocol.
``run_branch`` follows the all-success branch analytically, ``run_sampled``
draws one trajectory, and ``run_ensemble`` aggregates many seeded trials.
"""

from __future__ import annotations

import functools
import json
import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import gates, measure
from .errors import AnnihilatedStateError, CircuitError, CircuitParseError, DomainError
from .gates import GateSpec
from .linops import read_matrix
from .measure import MeasurementPair, ReversalPolicy
from .qstate import (
    MAX_QUBITS,
    StateVector,
    apply_embedded,
    basis_state,
    load_state,
    normalize,
    uniform_state,
)

_FULL_STRENGTH_ATOL = 1e-12


@dataclass(frozen=True, eq=False)
class CircuitStep:
    """One gate application; ``q=None`` means the optimal reversal strength."""

    gate: GateSpec
    targets: tuple[int, ...]
    c: complex = 1.0
    q: complex | None = None
    max_reversals: int = 0


@dataclass
class CircuitProgram:
    n_qubits: int
    steps: list[CircuitStep]
    initial_state: StateVector
    init_label: str = "basis 0"


@dataclass(frozen=True)
class StepRecord:
    label: str
    targets: tuple[int, ...]
    probability: float
    reversals: int


@dataclass
class RunRecord:
    """Outcome of one run; ``total_probability`` is the analytic protocol value."""

    outcome: str
    total_probability: float
    steps: list[StepRecord]
    final_state: StateVector | None
    failed_step: int | None = None


@dataclass
class EnsembleStats:
    trials: int
    successes: int
    success_rate: float
    std_error: float
    mean_reversals: float
    failures_by_step: dict[int, int]
    analytic_probability: float


def trial_rng(seed: int, index: int) -> np.random.Generator:
    """Independent, reproducible stream for trial ``index`` under ``seed``."""
    return np.random.default_rng(np.random.SeedSequence((seed, index)))


@functools.lru_cache(maxsize=256)
def _prepare(step: CircuitStep) -> tuple[MeasurementPair | None, ReversalPolicy | None]:
    if (
        step.gate.is_unitary
        and abs(step.c - 1.0) <= _FULL_STRENGTH_ATOL
        and step.max_reversals == 0
    ):
        return None, None
    pair = measure.build_pair(step.gate, step.c)
    policy = None
    if step.max_reversals > 0:
        policy = measure.build_reversal(pair, q=step.q, max_reversals=step.max_reversals)
    return pair, policy


def run_branch(program: CircuitProgram) -> RunRecord:
    """Follow the all-success branch, multiplying protocol probabilities."""
    state = program.initial_state
    records: list[StepRecord] = []
    total = 1.0
    for i, step in enumerate(program.steps):
        pair, policy = _prepare(step)
        if pair is None:
            state = apply_embedded(state, step.gate.matrix, step.targets)
            records.append(StepRecord(step.gate.label, step.targets, 1.0, 0))
            continue
        p = measure.analytic_success(pair, state, step.targets, policy)
        branch = apply_embedded(state, pair.m0, step.targets)
        try:
            state = normalize(branch)
        except AnnihilatedStateError:
            records.append(StepRecord(step.gate.label, step.targets, 0.0, 0))
            return RunRecord("failure", 0.0, records, None, failed_step=i)
        total *= p
        records.append(
            StepRecord(step.gate.label, step.targets, p, step.max_reversals)
        )
    return RunRecord("success", total, records, state)


def run_sampled(program: CircuitProgram, seed: int = 0,
                rng: np.random.Generator | None = None) -> RunRecord:
    """Sample one trajectory; a failed step aborts the run.

    With the default ``rng`` this is exactly trial 0 of ``run_ensemble`` under
    the same seed.
    """
    if rng is None:
        rng = trial_rng(seed, 0)
    state = program.initial_state
    records: list[StepRecord] = []
    total = 1.0
    for i, step in enumerate(program.steps):
        pair, policy = _prepare(step)
        if pair is None:
            state = apply_embedded(state, step.gate.matrix, step.targets)
            records.append(StepRecord(step.gate.label, step.targets, 1.0, 0))
            continue
        p = measure.analytic_success(pair, state, step.targets, policy)
        result = measure.run_with_reversal(pair, policy, state, step.targets, rng)
        records.append(StepRecord(step.gate.label, step.targets, p, result.reversals))
        if result.outcome == measure.FAILURE:
            return RunRecord("failure", 0.0, records, None, failed_step=i)
        state = result.state
        total *= p
    return RunRecord("success", total, records, state)


def _run_trials(program: CircuitProgram, seed: int, start: int,
                stop: int) -> tuple[int, int, Counter]:
    successes = 0
    reversals = 0
    failures: Counter = Counter()
    for t in range(start, stop):
        record = run_sampled(program, rng=trial_rng(seed, t))
        reversals += sum(r.reversals for r in record.steps)
        if record.outcome == "success":
            successes += 1
        else:
            failures[record.failed_step] += 1
    return successes, reversals, failures


def run_ensemble(program: CircuitProgram, seed: int = 0, trials: int = 10000,
                 jobs: int = 1) -> EnsembleStats:
    """Run many independent trials; results do not depend on ``jobs``."""
    if trials < 1:
        raise CircuitError(f"trials must be >= 1, got {trials}")
    if jobs < 1:
        raise CircuitError(f"jobs must be >= 1, got {jobs}")
    jobs = min(jobs, trials)
    if jobs == 1:
        successes, reversals, failures = _run_trials(program, seed, 0, trials)
    else:
        bounds = [(trials * j) // jobs for j in range(jobs + 1)]
        successes, reversals = 0, 0
        failures = Counter()
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = pool.map(
                _run_trials,
                [program] * jobs,
                [seed] * jobs,
                bounds[:-1],
                bounds[1:],
            )
            for s, r, f in parts:
                successes += s
                reversals += r
                failures.update(f)
    rate = successes / trials
    std_error = float(np.sqrt(rate * (1.0 - rate) / trials))
    return EnsembleStats(
        trials=trials,
        successes=successes,
        success_rate=rate,
        std_error=std_error,
        mean_reversals=reversals / trials,
        failures_by_step=dict(sorted(failures.items())),
        analytic_probability=run_branch(program).total_probability,
    )


def _parse_attributes(tokens: list[str], lineno: int) -> tuple[float, float | None, int, bool]:
    c = 1.0
    q: float | None = None
    q_optimal = False
    k = 0
    for token in tokens:
        name, _, value = token.partition("=")
        if not value:
            raise CircuitParseError(f"bad attribute {token!r}; expected name=value", lineno)
        if name == "c":
            try:
                c = float(value)
            except ValueError:
                raise CircuitParseError(f"bad strength c={value!r}", lineno) from None
        elif name == "q":
            if value == "opt":
                q_optimal = True
            else:
                try:
                    q = float(value)
                except ValueError:
                    raise CircuitParseError(f"bad reversal strength q={value!r}", lineno) from None
        elif name == "k":
            try:
                k = int(value)
            except ValueError:
                raise CircuitParseError(f"bad reversal count k={value!r}", lineno) from None
            if k < 0:
                raise CircuitParseError(f"k must be >= 0, got {k}", lineno)
        else:
            raise CircuitParseError(f"unknown attribute {name!r}", lineno)
    if not 0.0 < c <= 1.0:
        raise CircuitParseError(f"c must lie in (0, 1], got {c!r}", lineno)
    if (q is not None or q_optimal or k > 0) and c > 1.0 - 1e-12:
        raise CircuitParseError("reversal requires c < 1 (failure operator must be invertible)", lineno)
    if q is not None:
        bound = float(np.sqrt(1.0 - c * c))
        if not 0.0 < q <= bound + 1e-12:
            raise CircuitParseError(
                f"q must lie in (0, sqrt(1-c^2)] = (0, {bound!r}], got {q!r}", lineno
            )
    if q_optimal:
        q = float(np.sqrt(1.0 - c * c))
    return c, q, k, q_optimal


def _step_targets(tokens: list[str], gate: GateSpec, n_qubits: int,
                  lineno: int) -> tuple[int, ...]:
    try:
        targets = tuple(int(t) for t in tokens)
    except ValueError:
        raise CircuitParseError(f"bad target list {tokens!r}", lineno) from None
    if len(targets) != gate.arity:
        raise CircuitParseError(
            f"gate {gate.label} expects {gate.arity} targets, got {len(targets)}", lineno
        )
    for t in targets:
        if not 0 <= t < n_qubits:
            raise CircuitParseError(f"target qubit {t} out of range", lineno)
    if len(set(targets)) != len(targets):
        raise CircuitParseError(f"duplicate targets in {targets}", lineno)
    return targets


def parse(text: str, base_dir: str | None = None) -> CircuitProgram:
    """Parse the circuit text format.

    Lines: ``qubits <n>``, then optionally one ``init basis <i> | uniform |
    file <path>``, then ``gate <LABEL> <targets...> [c=] [q=real|opt] [k=]``
    or ``matrixgate <path> <targets...> [...]``.  ``#`` starts a comment.
    Paths resolve relative to ``base_dir``.
    """

    def resolve(path: str) -> str:
        if base_dir and not os.path.isabs(path):
            return os.path.join(base_dir, path)
        return path

    n_qubits: int | None = None
    init_state: StateVector | None = None
    init_label = "basis 0"
    steps: list[CircuitStep] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        keyword = tokens[0]
        if keyword == "qubits":
            if n_qubits is not None:
                raise CircuitParseError("duplicate qubits line", lineno)
            if len(tokens) != 2:
                raise CircuitParseError("expected 'qubits <n>'", lineno)
            try:
                n_qubits = int(tokens[1])
            except ValueError:
                raise CircuitParseError(f"bad qubit count {tokens[1]!r}", lineno) from None
            if not 1 <= n_qubits <= MAX_QUBITS:
                raise CircuitParseError(
                    f"qubit count must lie in [1, {MAX_QUBITS}], got {n_qubits}", lineno
                )
            continue
        if n_qubits is None:
            raise CircuitParseError("the qubits line must come first", lineno)
        if keyword == "init":
            if init_state is not None:
                raise CircuitParseError("duplicate init line", lineno)
            if steps:
                raise CircuitParseError("init must precede gate lines", lineno)
            if len(tokens) >= 2 and tokens[1] == "basis":
                if len(tokens) != 3:
                    raise CircuitParseError("expected 'init basis <index>'", lineno)
                try:
                    index = int(tokens[2])
                except ValueError:
                    raise CircuitParseError(f"bad basis index {tokens[2]!r}", lineno) from None
                if not 0 <= index < (1 << n_qubits):
                    raise CircuitParseError(f"basis index {index} out of range", lineno)
                init_state = basis_state(n_qubits, index)
                init_label = f"basis {index}"
            elif len(tokens) == 2 and tokens[1] == "uniform":
                init_state = uniform_state(n_qubits)
                init_label = "uniform"
            elif len(tokens) == 3 and tokens[1] == "file":
                try:
                    with open(resolve(tokens[2]), "r", encoding="utf-8") as fh:
                        init_state = normalize(load_state(fh.read(), n_qubits))
                except OSError as exc:
                    raise CircuitParseError(f"cannot read state file: {exc}", lineno) from None
                except (AnnihilatedStateError, ValueError) as exc:
                    raise CircuitParseError(str(exc), lineno) from None
                init_label = f"file {tokens[2]}"
            else:
                raise CircuitParseError(
                    "expected 'init basis <i>', 'init uniform' or 'init file <path>'", lineno
                )
            continue
        if keyword in ("gate", "matrixgate"):
            if len(tokens) < 2:
                raise CircuitParseError(f"missing gate label on '{keyword}' line", lineno)
            attr_tokens = [t for t in tokens[2:] if "=" in t]
            target_tokens = [t for t in tokens[2:] if "=" not in t]
            try:
                if keyword == "gate":
                    gate = gates.parse_label(tokens[1], lambda p: read_matrix(resolve(p)))
                else:
                    gate = gates.normalize_gate(
                        read_matrix(resolve(tokens[1])), label=f"MAT({tokens[1]})"
                    )
            except (DomainError, ValueError) as exc:
                raise CircuitParseError(str(exc), lineno) from None
            except OSError as exc:
                raise CircuitParseError(f"cannot read matrix file: {exc}", lineno) from None
            targets = _step_targets(target_tokens, gate, n_qubits, lineno)
            c, q, k, _ = _parse_attributes(attr_tokens, lineno)
            steps.append(CircuitStep(gate, targets, c=c, q=q, max_reversals=k))
            continue
        raise CircuitParseError(f"unknown directive {keyword!r}", lineno)
    if n_qubits is None:
        raise CircuitParseError("missing qubits line", 1)
    if init_state is None:
        init_state = basis_state(n_qubits, 0)
    return CircuitProgram(n_qubits, steps, init_state, init_label)


def parse_file(path) -> CircuitProgram:
    with open(path, "r", encoding="utf-8") as fh:
        return parse(fh.read(), base_dir=os.path.dirname(os.fspath(path)) or None)


def record_to_json(record: RunRecord) -> dict:
    """JSON-ready view of a run record."""
    final = None
    if record.final_state is not None:
        final = [
            {"index": i, "re": float(a.real), "im": float(a.imag)}
            for i, a in enumerate(record.final_state.amplitudes)
            if abs(a) > 1e-12
        ]
    doc = {
        "outcome": record.outcome,
        "total_probability": record.total_probability,
        "per_step": [
            {"label": r.label, "p": r.probability, "reversals": r.reversals}
            for r in record.steps
        ],
        "final_state": final,
    }
    if record.failed_step is not None:
        doc["failed_step"] = record.failed_step
    return doc


def stats_to_json(stats: EnsembleStats) -> dict:
    return {
        "trials": stats.trials,
        "successes": stats.successes,
        "success_rate": stats.success_rate,
        "std_error": stats.std_error,
        "mean_reversals": stats.mean_reversals,
        "failures_by_step": {str(k): v for k, v in stats.failures_by_step.items()},
        "analytic_probability": stats.analytic_probability,
    }


def dumps_json(doc) -> str:
    """Deterministic JSON rendering (stable key order, shortest float repr)."""
    return json.dumps(doc, indent=2)
