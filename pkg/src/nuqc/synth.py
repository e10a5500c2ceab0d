"""Factor normalized gates into the universal set {1-qubit unitaries, CNOT, diag(1, a)}.

A singular value decomposition peels off two unitaries and leaves a diagonal
of singular values; each diagonal entry below 1 becomes a multi-controlled
diag(1, a) factor conjugated by X gates.  Two realizations of those factors
are provided: a bare route that rewrites them over one- and two-qubit gates
(inverting the diagonal parameter where needed, at the cost of a known
proportionality constant), and an ancilla route that defers the nonunitary
part to a single measured ancilla.

Every netlist records that constant: the product of its embedded step
matrices, restricted to ancillas entering and leaving in |0>, equals
``scale**-1`` times the target operator.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import gates
from .errors import CircuitParseError, DomainError, SearchBudgetError, ShapeError
from .gates import GateSpec
from .linops import max_abs, read_matrix, svd, write_matrix
from .qstate import embedded_matrix

ZERO_ATOL = 1e-12
UNIT_ATOL = 1e-12
RESIDUAL_ATOL = 1e-8
NORMALIZED_SLACK = 1e-9
DEFAULT_EXPONENT_BUDGET = 10**7


@dataclass(frozen=True, eq=False)
class NetlistStep:
    gate: GateSpec
    targets: tuple[int, ...]


@dataclass
class GateNetlist:
    """Ordered gate applications realizing a target up to a recorded scale.

    Applying the steps first to last (equivalently, multiplying their embedded
    matrices last to first) and restricting to ancilla qubits in |0> on both
    sides yields ``scale**-1`` times the target operator.
    """

    n_qubits: int
    steps: list[NetlistStep] = field(default_factory=list)
    scale: float = 1.0
    ancillas: tuple[int, ...] = ()

    @property
    def gate_count(self) -> int:
        return len(self.steps)


def svd_split(gate: GateSpec) -> tuple[GateSpec, np.ndarray, GateSpec]:
    """Split ``gate`` as left_unitary @ diag(d) @ right_unitary.

    Singular values come back descending and clipped to [0, 1]; a largest
    singular value beyond 1 + 1e-9 means the gate was never normalized and
    raises ``DomainError``.
    """
    u, s, v = svd(gate.matrix)
    if s[0] > 1.0 + NORMALIZED_SLACK:
        raise DomainError(f"gate is not normalized: largest singular value {s[0]!r}")
    s = np.minimum(s, 1.0)
    return (
        gates.from_matrix(u, label="MAT(@left)"),
        s,
        gates.from_matrix(v, label="MAT(@right)"),
    )


def factor_diagonal(d: Sequence[float]) -> list[tuple[int, float]]:
    """Factor diag(d) over basis-index factors.

    Returns ``(x_mask, a)`` pairs, one per diagonal entry below 1: conjugating
    a multi-controlled diag(1, a) on the full register by X gates on the
    qubits set in ``x_mask`` moves its action onto that entry.  Entries within
    1e-12 of 1 are skipped and entries below 1e-12 are snapped to 0.
    """
    values = [float(v) for v in d]
    n = (len(values) - 1).bit_length()
    if len(values) < 2 or (1 << n) != len(values):
        raise ShapeError(f"diagonal length {len(values)} is not a power of two >= 2")
    out: list[tuple[int, float]] = []
    for idx, v in enumerate(values):
        if v < -ZERO_ATOL or v > 1.0 + NORMALIZED_SLACK:
            raise DomainError(f"diagonal entry {v!r} outside [0, 1]")
        v = min(max(v, 0.0), 1.0)
        if abs(v - 1.0) <= UNIT_ATOL:
            continue
        mask = ~idx & ((1 << n) - 1)
        out.append((mask, 0.0 if v < ZERO_ATOL else v))
    return out


def _x_step(qubit: int) -> NetlistStep:
    return NetlistStep(gates.x(), (qubit,))


def _inverse_cn1_steps(v: float, control: int, target: int) -> tuple[list[NetlistStep], float]:
    """Steps realizing v * controlled-diag(1, 1/v), i.e. diag(v, v, v, 1).

    Mirrors :func:`decompose_cn1` with the diagonal parameter inverted via the
    X-conjugation identity diag(1, 1/w) = (1/w) X diag(1, w) X; the dropped
    proportionality constant contributes 1/v to the netlist scale.
    """
    root = math.sqrt(v)
    steps = [
        _x_step(target),
        NetlistStep(gates.n1(root), (target,)),
        _x_step(target),
        NetlistStep(gates.cnot(), (control, target)),
        NetlistStep(gates.n1(root), (target,)),
        NetlistStep(gates.cnot(), (control, target)),
        _x_step(control),
        NetlistStep(gates.n1(root), (control,)),
        _x_step(control),
    ]
    return steps, 1.0 / v


def decompose_cn1(a_prime: float) -> GateNetlist:
    """Rewrite controlled-diag(1, a') over one-qubit gates and CNOTs.

    Control is qubit 0, target qubit 1.  The emitted product equals
    sqrt(a') * diag(1, 1, 1, a'), so the netlist scale is 1/sqrt(a').
    """
    if not 0.0 < a_prime < 1.0:
        raise DomainError(f"a' must lie in (0, 1), got {a_prime!r}")
    root = math.sqrt(a_prime)
    steps = [
        NetlistStep(gates.n1(root), (1,)),
        NetlistStep(gates.cnot(), (0, 1)),
        _x_step(1),
        NetlistStep(gates.n1(root), (1,)),
        _x_step(1),
        NetlistStep(gates.cnot(), (0, 1)),
        NetlistStep(gates.n1(root), (0,)),
    ]
    return GateNetlist(2, steps, 1.0 / root, ())


def decompose_mcn1_bare(a: float, n_controls: int) -> GateNetlist:
    """Rewrite a diag(1, a) on the target controlled by ``n_controls`` qubits.

    Controls are qubits 0..n_controls-1, target is qubit n_controls.  Walks a
    reflected Gray code over the controls, keeping the running parity of the
    current bit pattern on the pattern's highest control wire via CNOTs and
    firing a singly controlled diag(1, a**(1/2**(n_controls-1))) with a sign
    given by the pattern parity; odd patterns use the gate, even patterns its
    parameter-inverted mirror.  Uses 2**n_controls - 1 controlled factors and
    2**n_controls - 2 CNOTs.
    """
    if not 0.0 < a < 1.0:
        raise DomainError(f"a must lie in (0, 1), got {a!r}")
    if n_controls < 2:
        raise DomainError("one control is handled by decompose_cn1 directly")
    k = n_controls
    target = k
    root = a ** (1.0 / (1 << (k - 1)))
    steps: list[NetlistStep] = []
    scale = 1.0
    last = 0
    for j in range(1, 1 << k):
        pattern = j ^ (j >> 1)
        wire = pattern.bit_length() - 1
        if last:
            changed = (pattern ^ last).bit_length() - 1
            source = (last.bit_length() - 1) if changed == wire else changed
            steps.append(NetlistStep(gates.cnot(), (source, wire)))
        if bin(pattern).count("1") % 2 == 1:
            steps.append(NetlistStep(gates.cn1(root), (wire, target)))
        else:
            inv, factor = _inverse_cn1_steps(root, wire, target)
            steps.extend(inv)
            scale *= factor
        last = pattern
    return GateNetlist(k + 1, steps, scale, ())


def decompose_mcn1_ancilla(a: float, n_controls: int, keep_n1: bool = False) -> GateNetlist:
    """Realize a multi-controlled diag(1, a) by deferring it to an ancilla.

    Controls are qubits 0..n_controls-1 and the target is qubit n_controls;
    with no controls the construction acts on qubit 0 alone.  An X controlled
    on all data qubits marks the all-ones component on a fresh ancilla.  With
    ``keep_n1`` the ancilla is attenuated in place by diag(1, a); otherwise
    that remaining one-qubit nonunitary gate is itself replaced by its unitary
    partner rotating into a second ancilla that a projective diag(1, 0)
    measurement then clears.  Unmarking leaves the data register carrying the
    factor exactly, so the scale is 1.
    """
    if not 0.0 <= a < 1.0:
        raise DomainError(f"a must lie in [0, 1), got {a!r}")
    if n_controls < 0:
        raise DomainError(f"n_controls must be >= 0, got {n_controls}")
    k = n_controls
    if k == 0:
        if keep_n1:
            steps = [
                NetlistStep(gates.cnot(), (0, 1)),
                NetlistStep(gates.n1(a), (1,)),
                NetlistStep(gates.cnot(), (0, 1)),
            ]
        else:
            steps = [
                NetlistStep(gates.cu1(a), (0, 1)),
                NetlistStep(gates.n1(0.0), (1,)),
            ]
        return GateNetlist(2, steps, 1.0, (1,))
    mark = k + 1
    flag = NetlistStep(gates.ckx(k + 1), tuple(range(k + 1)) + (mark,))
    if keep_n1:
        steps = [flag, NetlistStep(gates.n1(a), (mark,)), flag]
        return GateNetlist(k + 2, steps, 1.0, (mark,))
    sink = k + 2
    steps = [
        flag,
        NetlistStep(gates.cu1(a), (mark, sink)),
        NetlistStep(gates.n1(0.0), (sink,)),
        flag,
    ]
    return GateNetlist(k + 3, steps, 1.0, (mark, sink))


def project_all(n_qubits: int) -> GateNetlist:
    """Success-branch projector onto |11...1>, one X diag(1,0) X per qubit."""
    if n_qubits < 1:
        raise DomainError(f"n_qubits must be >= 1, got {n_qubits}")
    steps: list[NetlistStep] = []
    for q in range(n_qubits):
        steps.append(_x_step(q))
        steps.append(NetlistStep(gates.n1(0.0), (q,)))
        steps.append(_x_step(q))
    return GateNetlist(n_qubits, steps, 1.0, ())


def _power_block(value: float, power: int, qubit: int) -> tuple[list[NetlistStep], float]:
    """|power| copies of diag(1, value), X-conjugated when the power is negative.

    Returns the steps and the block's scale contribution: the emitted product
    for a negative power is value**|power| * diag(1, value**power), so the
    convention product = scale**-1 * target makes that contribution
    value**-|power|.
    """
    steps = [NetlistStep(gates.n1(value), (qubit,)) for _ in range(abs(power))]
    if power >= 0:
        return steps, 1.0
    return [_x_step(qubit)] + steps + [_x_step(qubit)], value ** (-abs(power))


def approximate_n1(a: float, alpha: float, gamma: float, epsilon: float,
                   budget: int = DEFAULT_EXPONENT_BUDGET) -> tuple[int, int, GateNetlist]:
    """Approximate diag(1, a) with powers of just diag(1, alpha**gamma) and diag(1, alpha).

    Searches for integers (m, l) with |log_alpha(a) - (m*gamma + l)| < epsilon,
    trying |m| = 0, 1, 2, ... with the positive sign first and picking l by
    rounding.  Negative powers are realized through X conjugation, which costs
    a known proportionality constant folded into the netlist scale.  Raises
    ``SearchBudgetError`` once |m| exceeds ``budget``.
    """
    if not 0.0 < a < 1.0:
        raise DomainError(f"a must lie in (0, 1), got {a!r}")
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    if gamma <= 0.0:
        raise DomainError(f"gamma must be positive, got {gamma!r}")
    if epsilon <= 1e-12:
        raise DomainError(f"epsilon must exceed 1e-12, got {epsilon!r}")
    goal = math.log(a) / math.log(alpha)
    found: tuple[int, int] | None = None
    m = 0
    while True:
        for candidate in ((m,) if m == 0 else (m, -m)):
            l = round(goal - candidate * gamma)
            if abs(goal - candidate * gamma - l) < epsilon:
                found = (candidate, int(l))
                break
        if found is not None:
            break
        m += 1
        if m > budget:
            raise SearchBudgetError(
                f"no (m, l) within epsilon={epsilon!r} for |m| <= {budget}"
            )
    m, l = found
    steps: list[NetlistStep] = []
    scale = 1.0
    strong = alpha ** gamma
    for value, power in ((alpha, l), (strong, m)):
        if power == 0:
            continue
        block, contribution = _power_block(value, power, 0)
        steps.extend(block)
        scale *= contribution
    return m, l, GateNetlist(1, steps, scale, ())


def synthesize(gate: GateSpec, mode: str = "bare") -> GateNetlist:
    """Compile a normalized gate to a netlist over the universal set.

    ``bare`` keeps the register width equal to the gate arity and accepts the
    scale cost of inverted diagonal parameters; ``ancilla`` appends measured
    ancilla qubits (restored to |0> on the success branch) and keeps scale 1.
    An identity input yields an empty netlist.
    """
    if mode not in ("bare", "ancilla"):
        raise DomainError(f"mode must be 'bare' or 'ancilla', got {mode!r}")
    n = gate.arity
    # matrix index bit j lives on qubit j, and a step's first target is the
    # most significant bit of its own index, so raw-matrix steps span the
    # register highest qubit first
    data = tuple(reversed(range(n)))
    left, d, right = _split_or_passthrough(gate)
    factors = factor_diagonal(d)
    if not factors:
        steps = []
        if max_abs(gate.matrix - np.eye(1 << n)) > UNIT_ATOL:
            steps.append(NetlistStep(gates.from_matrix(gate.matrix, "MAT(@gate)"), data))
        return GateNetlist(n, steps, 1.0, ())
    if mode == "ancilla":
        width = n + 1 if n == 1 else n + 2
        ancillas = tuple(range(n, width))
    else:
        width = n
        ancillas = ()
    steps = []
    scale = 1.0
    eye = np.eye(1 << n)
    if right is not None and max_abs(right.matrix - eye) > UNIT_ATOL:
        steps.append(NetlistStep(right, data))
    for mask, a in factors:
        conjugation = [_x_step(q) for q in range(n) if (mask >> q) & 1]
        steps.extend(conjugation)
        sub = _factor_core(a, n, mode)
        steps.extend(sub.steps)
        scale *= sub.scale
        steps.extend(conjugation)
    if left is not None and max_abs(left.matrix - eye) > UNIT_ATOL:
        steps.append(NetlistStep(left, data))
    return GateNetlist(width, steps, scale, ancillas)


def _split_or_passthrough(gate: GateSpec):
    """Diagonal split of ``gate``, avoiding the SVD when it is already diagonal.

    Degenerate singular values let the SVD pick arbitrary unitary bases, which
    would wrap an exactly diagonal input in two opaque permutation steps.
    """
    m = gate.matrix
    d = np.diagonal(m)
    if (
        max_abs(m - np.diag(d)) <= ZERO_ATOL
        and max_abs(d.imag) <= ZERO_ATOL
        and np.all(d.real >= -ZERO_ATOL)
        and np.all(d.real <= 1.0 + NORMALIZED_SLACK)
    ):
        return None, np.clip(d.real, 0.0, 1.0), None
    return svd_split(gate)


def _factor_core(a: float, n: int, mode: str) -> GateNetlist:
    """Netlist for diag(1,...,1,a) on an n-qubit register (controls 0..n-2, target n-1)."""
    if mode == "ancilla":
        return decompose_mcn1_ancilla(a, n - 1)
    if n == 1:
        return GateNetlist(1, [NetlistStep(gates.n1(a), (0,))], 1.0, ())
    if a < ZERO_ATOL:
        # a projective factor has no legal parameter-inverted mirror, so emit
        # it as a single gate and let the runtime realize it as a measurement
        if n == 2:
            step = NetlistStep(gates.cn1(0.0), (0, 1))
        else:
            entries = [1.0] * ((1 << n) - 1) + [0.0]
            step = NetlistStep(gates.diagonal(entries), tuple(reversed(range(n))))
        return GateNetlist(n, [step], 1.0, ())
    if n == 2:
        return decompose_cn1(a)
    return decompose_mcn1_bare(a, n - 1)


def netlist_matrix(netlist: GateNetlist) -> np.ndarray:
    """Dense product of the embedded step matrices (last step leftmost)."""
    dim = 1 << netlist.n_qubits
    acc = np.eye(dim, dtype=np.complex128)
    for step in netlist.steps:
        acc = embedded_matrix(step.gate.matrix, step.targets, netlist.n_qubits) @ acc
    return acc


def realized_operator(netlist: GateNetlist) -> np.ndarray:
    """Netlist product restricted to ancillas entering and leaving in |0>."""
    full = netlist_matrix(netlist)
    if not netlist.ancillas:
        return full
    anc_mask = 0
    for q in netlist.ancillas:
        anc_mask |= 1 << q
    keep = [i for i in range(1 << netlist.n_qubits) if not (i & anc_mask)]
    return full[np.ix_(keep, keep)]


def reconstruction_residual(netlist: GateNetlist, target) -> float:
    """Max-norm distance between the realized operator and scale**-1 * target."""
    return max_abs(realized_operator(netlist) - np.asarray(target) / netlist.scale)


MatNamer = Callable[[int, np.ndarray], str]


def format_netlist(netlist: GateNetlist, mat_namer: MatNamer | None = None) -> str:
    """Render a netlist in the text format: header line, then one gate per line.

    Raw-matrix steps need a ``mat_namer`` that stores the matrix and returns a
    path for the MAT(...) label; :func:`write_netlist` provides one.
    """
    lines = [f"qubits {netlist.n_qubits} scale {netlist.scale!r}"]
    if netlist.ancillas:
        lines.append("# ancilla " + " ".join(str(q) for q in netlist.ancillas))
    for i, step in enumerate(netlist.steps):
        label = step.gate.label
        if label.startswith("MAT("):
            if mat_namer is not None:
                label = f"MAT({mat_namer(i, step.gate.matrix)})"
            elif "@" in label:
                raise DomainError(
                    "netlist contains raw-matrix gates; write it to a file instead"
                )
        lines.append(label + " " + " ".join(str(t) for t in step.targets))
    return "\n".join(lines) + "\n"


def write_netlist(netlist: GateNetlist, path) -> None:
    """Write the netlist to ``path``, dumping raw-matrix gates as sidecar files."""
    directory = os.path.dirname(os.fspath(path))
    base = os.path.basename(os.fspath(path))

    def namer(index: int, matrix: np.ndarray) -> str:
        name = f"{base}.g{index}.mat"
        write_matrix(os.path.join(directory, name) if directory else name, matrix)
        return name

    text = format_netlist(netlist, namer)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def read_netlist(path) -> GateNetlist:
    """Parse a netlist file; MAT(...) paths resolve relative to it."""
    directory = os.path.dirname(os.fspath(path))

    def loader(name: str) -> np.ndarray:
        return read_matrix(os.path.join(directory, name) if directory else name)

    with open(path, "r", encoding="utf-8") as fh:
        raw_lines = fh.read().splitlines()
    header: tuple[int, float] | None = None
    ancillas: tuple[int, ...] = ()
    steps: list[NetlistStep] = []
    for lineno, raw in enumerate(raw_lines, start=1):
        stripped = raw.strip()
        if stripped.startswith("# ancilla"):
            try:
                ancillas = tuple(int(t) for t in stripped.split()[2:])
            except ValueError:
                raise CircuitParseError(f"bad ancilla comment {raw!r}", lineno) from None
            continue
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if header is None:
            if len(tokens) != 4 or tokens[0] != "qubits" or tokens[2] != "scale":
                raise CircuitParseError("expected header 'qubits <n> scale <s>'", lineno)
            try:
                header = (int(tokens[1]), float(tokens[3]))
            except ValueError:
                raise CircuitParseError(f"bad header {raw!r}", lineno) from None
            continue
        try:
            gate = gates.parse_label(tokens[0], loader)
            targets = tuple(int(t) for t in tokens[1:])
        except (DomainError, ValueError, OSError) as exc:
            raise CircuitParseError(str(exc), lineno) from None
        if len(targets) != gate.arity:
            raise CircuitParseError(
                f"gate {tokens[0]} expects {gate.arity} targets, got {len(targets)}", lineno
            )
        steps.append(NetlistStep(gate, targets))
    if header is None:
        raise CircuitParseError("empty netlist file", 1)
    return GateNetlist(header[0], steps, header[1], ancillas)
