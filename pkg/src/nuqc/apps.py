"""Two worked applications: a NAND netlist compiler and a satisfiability search.

The compiler maps a classical NAND netlist onto a register, replacing a
topological prefix of the NAND nodes by the measured two-qubit NAND gate
(which consumes both input qubits, freeing one) and the remainder by
Toffoli-style reversible logic with one work qubit each.  The search runner
prepares an oracle-correlated superposition and drives it with the
satisfiability gate, whose per-step success probability is 1/6.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import gates
from .circuit import CircuitProgram, CircuitStep, RunRecord, run_branch, run_sampled
from .errors import (
    CircuitParseError,
    DomainError,
    NetlistError,
    ShapeError,
    UnsupportedInstanceError,
)
from .qstate import StateVector, basis_state, fidelity, norm_sq

_WIRE_CHARS = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_")


@dataclass(frozen=True)
class NetlistNode:
    kind: str  # "nand" or "copy"
    outputs: tuple[str, ...]
    inputs: tuple[str, ...]


@dataclass
class NandNetlist:
    n_inputs: int
    nodes: list[NetlistNode]
    outputs: tuple[str, ...]

    @property
    def input_wires(self) -> tuple[str, ...]:
        return tuple(f"in{i}" for i in range(self.n_inputs))

    @property
    def nand_count(self) -> int:
        return sum(1 for n in self.nodes if n.kind == "nand")

    @property
    def copy_count(self) -> int:
        return sum(1 for n in self.nodes if n.kind == "copy")


def _check_wire_name(name: str, lineno: int) -> str:
    if not name or set(name) - _WIRE_CHARS or name[0].isdigit():
        raise CircuitParseError(f"bad wire name {name!r}", lineno)
    return name


def parse_nand_netlist(text: str) -> NandNetlist:
    """Parse the netlist format.

    ``inputs <k>`` declares wires in0..in{k-1}; node lines are
    ``w = NAND a b`` and ``w1 w2 = COPY a``; ``outputs w...`` closes the file.
    Wires must be defined before use and each NAND consumes its inputs.
    """
    n_inputs: int | None = None
    nodes: list[NetlistNode] = []
    outputs: tuple[str, ...] | None = None
    live: set[str] = set()
    defined: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if tokens[0] == "inputs":
            if n_inputs is not None:
                raise CircuitParseError("duplicate inputs line", lineno)
            if len(tokens) != 2:
                raise CircuitParseError("expected 'inputs <k>'", lineno)
            try:
                n_inputs = int(tokens[1])
            except ValueError:
                raise CircuitParseError(f"bad input count {tokens[1]!r}", lineno) from None
            if n_inputs < 1:
                raise CircuitParseError("need at least one input wire", lineno)
            live = {f"in{i}" for i in range(n_inputs)}
            defined = set(live)
            continue
        if n_inputs is None:
            raise CircuitParseError("the inputs line must come first", lineno)
        if outputs is not None:
            raise CircuitParseError("outputs line must be last", lineno)
        if tokens[0] == "outputs":
            if len(tokens) < 2:
                raise CircuitParseError("outputs line names no wires", lineno)
            for w in tokens[1:]:
                _check_wire_name(w, lineno)
                if w not in live:
                    raise CircuitParseError(f"output wire {w!r} is not live", lineno)
            outputs = tuple(tokens[1:])
            continue
        if "=" not in tokens:
            raise CircuitParseError(f"unrecognized line {raw!r}", lineno)
        eq = tokens.index("=")
        outs = tuple(_check_wire_name(w, lineno) for w in tokens[:eq])
        rhs = tokens[eq + 1:]
        if not rhs:
            raise CircuitParseError("missing node kind after '='", lineno)
        kind, ins = rhs[0], tuple(rhs[1:])
        if kind == "NAND":
            if len(outs) != 1 or len(ins) != 2:
                raise CircuitParseError("NAND form is 'w = NAND a b'", lineno)
            if ins[0] == ins[1]:
                raise CircuitParseError(
                    "NAND inputs must be distinct wires (use COPY for fanout)", lineno
                )
        elif kind == "COPY":
            if len(outs) != 2 or len(ins) != 1:
                raise CircuitParseError("COPY form is 'w1 w2 = COPY a'", lineno)
            if outs[0] == outs[1]:
                raise CircuitParseError("COPY outputs must be distinct", lineno)
        else:
            raise CircuitParseError(f"unknown node kind {kind!r}", lineno)
        for w in ins:
            _check_wire_name(w, lineno)
            if w not in live:
                state = "already consumed" if w in defined else "undefined"
                raise CircuitParseError(f"wire {w!r} is {state}", lineno)
        for w in outs:
            if w in defined:
                raise CircuitParseError(f"wire {w!r} is already defined", lineno)
        live -= set(ins)
        live |= set(outs)
        defined |= set(outs)
        nodes.append(NetlistNode(kind.lower(), outs, ins))
    if n_inputs is None:
        raise CircuitParseError("missing inputs line", 1)
    if outputs is None:
        raise CircuitParseError("missing outputs line", 1)
    return NandNetlist(n_inputs, nodes, outputs)


def evaluate_netlist(netlist: NandNetlist, bits: Sequence[int]) -> dict[str, int]:
    """Classical reference evaluation; returns the values of all defined wires."""
    if len(bits) != netlist.n_inputs:
        raise NetlistError(f"expected {netlist.n_inputs} input bits, got {len(bits)}")
    values = {f"in{i}": int(b) & 1 for i, b in enumerate(bits)}
    for node in netlist.nodes:
        if node.kind == "nand":
            a, b = (values[w] for w in node.inputs)
            values[node.outputs[0]] = 1 - (a & b)
        else:
            values[node.outputs[0]] = values[node.inputs[0]]
            values[node.outputs[1]] = values[node.inputs[0]]
    return values


@dataclass
class NandLayout:
    """Register plan for a compiled netlist."""

    n_qubits: int
    wire_qubits: dict[str, int]  # live wires after the last node
    output_qubits: tuple[int, ...]
    quantum_nands: int
    toffoli_nands: int
    copies: int


class QubitSavings(NamedTuple):
    qubits_quantum_route: int
    qubits_toffoli_route: int
    saved: int


def _check_split(netlist: NandNetlist, m: int) -> None:
    if not 0 <= m <= netlist.nand_count:
        raise NetlistError(
            f"quantum prefix m={m} must lie in [0, {netlist.nand_count}]"
        )


def qubit_savings(netlist: NandNetlist, m: int) -> QubitSavings:
    """Register sizes with and without the m-gate quantum stage; saves m qubits."""
    _check_split(netlist, m)
    base = netlist.n_inputs + netlist.copy_count
    toffoli_route = base + netlist.nand_count
    return QubitSavings(toffoli_route - m, toffoli_route, m)


def _allocate(netlist: NandNetlist, m: int,
              c: float) -> tuple[list[CircuitStep], dict[str, int], int]:
    wire_q = {f"in{i}": i for i in range(netlist.n_inputs)}
    next_q = netlist.n_inputs
    steps: list[CircuitStep] = []
    nand_seen = 0
    for node in netlist.nodes:
        if node.kind == "copy":
            src = wire_q.pop(node.inputs[0])
            fresh = next_q
            next_q += 1
            steps.append(CircuitStep(gates.cnot(), (src, fresh)))
            wire_q[node.outputs[0]] = src
            wire_q[node.outputs[1]] = fresh
            continue
        qa = wire_q.pop(node.inputs[0])
        qb = wire_q.pop(node.inputs[1])
        nand_seen += 1
        if nand_seen <= m:
            steps.append(CircuitStep(gates.nand(), (qa, qb), c=c))
            wire_q[node.outputs[0]] = qa
        else:
            fresh = next_q
            next_q += 1
            steps.append(CircuitStep(gates.x(), (fresh,)))
            steps.append(CircuitStep(gates.ckx(2), (qa, qb, fresh)))
            wire_q[node.outputs[0]] = fresh
    return steps, wire_q, next_q


def nand_layout(netlist: NandNetlist, m: int) -> NandLayout:
    """Register plan for :func:`compile_nand` with the same split."""
    _check_split(netlist, m)
    _, wire_q, n_qubits = _allocate(netlist, m, 1.0)
    return NandLayout(
        n_qubits=n_qubits,
        wire_qubits=wire_q,
        output_qubits=tuple(wire_q[w] for w in netlist.outputs),
        quantum_nands=m,
        toffoli_nands=netlist.nand_count - m,
        copies=netlist.copy_count,
    )


def compile_nand(netlist: NandNetlist, m: int, c: float = 1.0,
                 input_bits: Sequence[int] | None = None,
                 input_state: StateVector | None = None) -> CircuitProgram:
    """Compile the netlist with its first ``m`` NAND nodes run as quantum gates.

    Input wires sit on qubits 0..k-1.  A quantum NAND leaves its result on the
    first input's qubit (the other comes back as |0> and is retired); a
    Toffoli-stage NAND targets a fresh work qubit raised to |1> by an X gate;
    COPY becomes a CNOT onto a fresh qubit.  The initial register is either a
    basis state from ``input_bits`` (default all ones) or an arbitrary
    ``input_state`` over the input wires with work qubits in |0>.
    """
    _check_split(netlist, m)
    k = netlist.n_inputs
    if input_bits is not None and input_state is not None:
        raise NetlistError("give input_bits or input_state, not both")
    steps, _, n_qubits = _allocate(netlist, m, c)
    if input_state is not None:
        if input_state.n_qubits != k:
            raise NetlistError(
                f"input_state spans {input_state.n_qubits} qubits, netlist has {k} inputs"
            )
        amps = np.zeros(1 << n_qubits, dtype=np.complex128)
        amps[: 1 << k] = input_state.amplitudes
        init = StateVector(n_qubits, amps, copy=False)
        init_label = "input state"
    else:
        bits = [1] * k if input_bits is None else [int(b) & 1 for b in input_bits]
        if len(bits) != k:
            raise NetlistError(f"expected {k} input bits, got {len(bits)}")
        index = sum(b << i for i, b in enumerate(bits))
        init = basis_state(n_qubits, index)
        init_label = f"basis {index}"
    return CircuitProgram(n_qubits, steps, init, init_label)


def qubit_bit(state: StateVector, qubit: int) -> int:
    """Round the marginal of one qubit to a classical bit."""
    prob_one = 0.0
    for idx, amp in enumerate(state.amplitudes):
        if (idx >> qubit) & 1:
            prob_one += abs(amp) ** 2
    total = norm_sq(state)
    return int(prob_one / total > 0.5)


@dataclass(frozen=True)
class TruthTableOracle:
    """Boolean function given by its full truth table."""

    n: int
    table: tuple[int, ...]

    def __post_init__(self):
        if self.n < 1:
            raise ShapeError(f"n must be >= 1, got {self.n}")
        if len(self.table) != 1 << self.n:
            raise ShapeError(
                f"table length {len(self.table)} does not match n={self.n}"
            )
        if set(self.table) - {0, 1}:
            raise ShapeError("table entries must be bits")

    @property
    def satisfying_count(self) -> int:
        return sum(self.table)


def parse_truth_table(text: str, n: int | None = None) -> TruthTableOracle:
    """Parse a truth table written as one line of 2^n bits, x ascending."""
    bits = text.strip()
    if set(bits) - {"0", "1"}:
        raise ShapeError(f"truth table must be a bit string, got {bits!r}")
    width = (len(bits) - 1).bit_length() if bits else 0
    if not bits or (1 << width) != len(bits):
        raise ShapeError(f"truth table length {len(bits)} is not a power of two")
    if n is not None and n != width:
        raise ShapeError(f"table has {len(bits)} rows, expected 2^{n}")
    return TruthTableOracle(width, tuple(int(b) for b in bits))


@dataclass
class SearchResult:
    outcome: str
    s_found: int | None
    total_probability: float
    final_state: StateVector | None
    record: RunRecord


def search_program(oracle: TruthTableOracle) -> CircuitProgram:
    """Program for the measured satisfiability search.

    The flag qubit is qubit 0 and input bit i of x sits on qubit i+1.  The
    initial state is (1/sqrt(2^n)) sum_x |x>|F(x)>, prepared by direct
    amplitude initialization; the search gate is then applied to each data
    qubit paired with the flag.
    """
    n = oracle.n
    width = n + 1
    amps = np.zeros(1 << width, dtype=np.complex128)
    weight = 1.0 / math.sqrt(1 << n)
    for x in range(1 << n):
        amps[(x << 1) | oracle.table[x]] = weight
    init = StateVector(width, amps, copy=False)
    gate = gates.abrams_lloyd()
    steps = [CircuitStep(gate, (i, 0)) for i in range(1, width)]
    return CircuitProgram(width, steps, init, "oracle superposition")


def abrams_lloyd_run(oracle: TruthTableOracle, mode: str = "branch",
                     seed: int = 0) -> SearchResult:
    """Run the search; the flag qubit ends in |s> for instances with s <= 1.

    Each of the n steps succeeds with probability 1/6, so the all-success
    branch carries probability (1/6)^n.
    """
    if oracle.satisfying_count >= 2:
        raise UnsupportedInstanceError(
            f"search handles s in {{0, 1}}, table has s={oracle.satisfying_count}"
        )
    if mode not in ("branch", "sampled"):
        raise DomainError(f"mode must be 'branch' or 'sampled', got {mode!r}")
    program = search_program(oracle)
    record = run_branch(program) if mode == "branch" else run_sampled(program, seed)
    if record.outcome != "success":
        return SearchResult("failure", None, record.total_probability, None, record)
    s_found = qubit_bit(record.final_state, 0)
    return SearchResult(
        "success", s_found, record.total_probability, record.final_state, record
    )


def flag_basis_fidelity(state: StateVector, s: int) -> float:
    """Fidelity of ``state`` against (uniform data register) x |s> on the flag."""
    n = state.n_qubits - 1
    amps = np.zeros(1 << state.n_qubits, dtype=np.complex128)
    weight = 1.0 / math.sqrt(1 << n)
    for x in range(1 << n):
        amps[(x << 1) | s] = weight
    return fidelity(state, StateVector(state.n_qubits, amps, copy=False))


def abrams_lloyd_failure_op() -> np.ndarray:
    """The explicit (non-Hermitian) failure operator quoted for the search gate.

    It differs from the principal square root by left unitary freedom; both
    satisfy M1^dag M1 = I - N^dag N.
    """
    m = np.array(
        [
            [math.sqrt(6.0), 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 2.0, 0.0],
            [0.0, -1.0, 0.0, 2.0],
        ],
        dtype=np.complex128,
    )
    return m / math.sqrt(6.0)
