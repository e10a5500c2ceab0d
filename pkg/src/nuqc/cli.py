"""Command-line front end.

Exit codes: 0 success, 1 usage or parse error, 2 sampled-run failure,
3 numerical degeneracy.  All randomness flows through --seed, so identical
invocations produce byte-identical output.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import apps, circuit, gates, measure, synth
from .errors import DegenerateBranchError, NuqcError
from .linops import format_matrix, read_matrix
from .qstate import dump_state

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUN_FAILED = 2
EXIT_DEGENERATE = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nuqc",
        description="Simulate and synthesize measurement-driven nonunitary circuits.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a circuit file")
    sim.add_argument("circuit", help="circuit file path")
    sim.add_argument("--mode", choices=["branch", "sampled", "mc"], default="branch")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--trials", type=int, default=10000)
    sim.add_argument("--jobs", type=int, default=1)
    sim.add_argument("--json", action="store_true")

    syn = sub.add_parser("synth", help="compile a matrix file to a gate netlist")
    syn.add_argument("matrix", help="matrix file path")
    syn.add_argument("--mode", choices=["bare", "ancilla"], default="bare")
    syn.add_argument("--out", help="netlist output path")
    syn.add_argument("--tolerance", type=float, default=synth.RESIDUAL_ATOL)
    syn.add_argument("--json", action="store_true")

    app = sub.add_parser("approx", help="two-gate approximation of diag(1, a)")
    app.add_argument("--a", type=float, required=True)
    app.add_argument("--alpha", type=float, required=True)
    app.add_argument("--gamma", type=float, required=True)
    app.add_argument("--eps", type=float, required=True)
    app.add_argument("--budget", type=int, default=synth.DEFAULT_EXPONENT_BUDGET)
    app.add_argument("--json", action="store_true")

    dn = sub.add_parser("demo-nand", help="compile and run a NAND netlist")
    dn.add_argument("--netlist", required=True, help="NAND netlist file")
    dn.add_argument("--m", type=int, required=True, help="quantum NAND prefix length")
    dn.add_argument("--c", type=float, default=1.0)
    dn.add_argument("--input", help="input bits, e.g. 101 (default: all ones)")
    dn.add_argument("--mode", choices=["branch", "sampled", "mc"], default="branch")
    dn.add_argument("--seed", type=int, default=0)
    dn.add_argument("--trials", type=int, default=10000)
    dn.add_argument("--jobs", type=int, default=1)
    dn.add_argument("--json", action="store_true")

    da = sub.add_parser("demo-al", help="run the satisfiability search")
    da.add_argument("--table", required=True, help="truth table bits, x ascending")
    da.add_argument("--n", type=int, help="expected input width (consistency check)")
    da.add_argument("--mode", choices=["branch", "sampled"], default="branch")
    da.add_argument("--seed", type=int, default=0)
    da.add_argument("--json", action="store_true")

    pr = sub.add_parser("probe", help="print a gate and its measurement operators")
    pr.add_argument("label", help="gate label, e.g. NAND or N1(0.5)")
    pr.add_argument("--c", type=float)
    pr.add_argument("--q", help="reversal strength (number or 'opt')")
    pr.add_argument("--k", type=int, default=0)
    pr.add_argument("--json", action="store_true")
    return parser


def _matrix_doc(a: np.ndarray) -> list[list[list[float]]]:
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def _print_record(record: circuit.RunRecord, as_json: bool) -> None:
    if as_json:
        print(circuit.dumps_json(circuit.record_to_json(record)))
        return
    for i, step in enumerate(record.steps):
        targets = ",".join(str(t) for t in step.targets)
        print(f"step {i}: {step.label} [{targets}] p={step.probability!r} "
              f"reversals={step.reversals}")
    print(f"outcome: {record.outcome}")
    if record.failed_step is not None:
        print(f"failed at step: {record.failed_step}")
    print(f"total probability: {record.total_probability!r}")
    if record.final_state is not None:
        print("final state:")
        sys.stdout.write(dump_state(record.final_state))


def _print_stats(stats: circuit.EnsembleStats, as_json: bool) -> None:
    if as_json:
        print(circuit.dumps_json(circuit.stats_to_json(stats)))
        return
    print(f"trials: {stats.trials}")
    print(f"successes: {stats.successes}")
    print(f"success rate: {stats.success_rate!r} (std error {stats.std_error!r})")
    print(f"mean reversals per trial: {stats.mean_reversals!r}")
    print(f"analytic probability: {stats.analytic_probability!r}")
    if stats.failures_by_step:
        parts = ", ".join(f"step {k}: {v}" for k, v in stats.failures_by_step.items())
        print(f"failures by step: {parts}")


def _cmd_simulate(args) -> int:
    program = circuit.parse_file(args.circuit)
    if args.mode == "mc":
        stats = circuit.run_ensemble(program, seed=args.seed, trials=args.trials,
                                     jobs=args.jobs)
        _print_stats(stats, args.json)
        return EXIT_OK
    if args.mode == "branch":
        record = circuit.run_branch(program)
    else:
        record = circuit.run_sampled(program, seed=args.seed)
    _print_record(record, args.json)
    return EXIT_OK if record.outcome == "success" else EXIT_RUN_FAILED


def _cmd_synth(args) -> int:
    name = os.path.basename(args.matrix)
    gate = gates.normalize_gate(read_matrix(args.matrix), label=f"MAT({name})")
    netlist = synth.synthesize(gate, mode=args.mode)
    residual = synth.reconstruction_residual(netlist, gate.matrix)
    body = None
    if args.out:
        synth.write_netlist(netlist, args.out)
    else:
        try:
            body = synth.format_netlist(netlist)
        except NuqcError:
            print("netlist contains raw-matrix gates; rerun with --out", file=sys.stderr)
            return EXIT_USAGE
    if args.json:
        doc = {
            "qubits": netlist.n_qubits,
            "gates": netlist.gate_count,
            "scale": netlist.scale,
            "residual": residual,
            "normalization_scale": gate.normalization_scale,
            "out": args.out,
        }
        if body is not None:
            doc["netlist"] = body
        print(circuit.dumps_json(doc))
    else:
        print(f"qubits: {netlist.n_qubits}")
        print(f"gates: {netlist.gate_count}")
        print(f"scale: {netlist.scale!r}")
        print(f"input normalization factor: {gate.normalization_scale!r}")
        print(f"reconstruction residual: {residual!r}")
        if args.out:
            print(f"netlist written to {args.out}")
        elif body:
            sys.stdout.write(body)
    if residual > args.tolerance:
        print(f"residual exceeds tolerance {args.tolerance!r}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


def _cmd_approx(args) -> int:
    m, l, netlist = synth.approximate_n1(args.a, args.alpha, args.gamma, args.eps,
                                         budget=args.budget)
    realized = float(args.alpha ** (m * args.gamma + l))
    residual = float(abs(np.log(args.a) / np.log(args.alpha) - (m * args.gamma + l)))
    if args.json:
        doc = {
            "m": m,
            "l": l,
            "realized": realized,
            "log_residual": residual,
            "gates": netlist.gate_count,
            "scale": netlist.scale,
        }
        print(circuit.dumps_json(doc))
    else:
        print(f"m: {m}")
        print(f"l: {l}")
        print(f"realized: {realized!r}")
        print(f"log-domain residual: {residual!r}")
        print(f"gates: {netlist.gate_count}")
        print(f"scale: {netlist.scale!r}")
    return EXIT_OK


def _cmd_demo_nand(args) -> int:
    with open(args.netlist, "r", encoding="utf-8") as fh:
        netlist = apps.parse_nand_netlist(fh.read())
    bits = None
    if args.input is not None:
        if set(args.input) - {"0", "1"} or len(args.input) != netlist.n_inputs:
            print(f"--input must be {netlist.n_inputs} bits", file=sys.stderr)
            return EXIT_USAGE
        bits = [int(b) for b in args.input]
    program = apps.compile_nand(netlist, args.m, c=args.c, input_bits=bits)
    layout = apps.nand_layout(netlist, args.m)
    savings = apps.qubit_savings(netlist, args.m)
    if args.mode == "mc":
        stats = circuit.run_ensemble(program, seed=args.seed, trials=args.trials,
                                     jobs=args.jobs)
        _print_stats(stats, args.json)
        return EXIT_OK
    if args.mode == "branch":
        record = circuit.run_branch(program)
    else:
        record = circuit.run_sampled(program, seed=args.seed)
    output_bits = None
    if record.outcome == "success":
        output_bits = {
            wire: apps.qubit_bit(record.final_state, layout.wire_qubits[wire])
            for wire in netlist.outputs
        }
    if args.json:
        doc = circuit.record_to_json(record)
        doc["outputs"] = output_bits
        doc["qubits"] = layout.n_qubits
        doc["qubit_savings"] = {
            "quantum_route": savings.qubits_quantum_route,
            "toffoli_route": savings.qubits_toffoli_route,
            "saved": savings.saved,
        }
        print(circuit.dumps_json(doc))
    else:
        _print_record(record, False)
        if output_bits is not None:
            rendered = " ".join(f"{w}={b}" for w, b in output_bits.items())
            print(f"outputs: {rendered}")
        print(f"qubits used: {layout.n_qubits} "
              f"(all-reversible route: {savings.qubits_toffoli_route}, saved: {savings.saved})")
    return EXIT_OK if record.outcome == "success" else EXIT_RUN_FAILED


def _cmd_demo_al(args) -> int:
    oracle = apps.parse_truth_table(args.table, n=args.n)
    result = apps.abrams_lloyd_run(oracle, mode=args.mode, seed=args.seed)
    if args.json:
        doc = circuit.record_to_json(result.record)
        doc["s"] = result.s_found
        print(circuit.dumps_json(doc))
    else:
        _print_record(result.record, False)
        if result.s_found is not None:
            print(f"s: {result.s_found}")
    return EXIT_OK if result.outcome == "success" else EXIT_RUN_FAILED


def _cmd_probe(args) -> int:
    gate = gates.parse_label(args.label, read_matrix)
    pair = None
    policy = None
    if args.c is not None:
        pair = measure.build_pair(gate, args.c)
        if args.q is not None or args.k > 0:
            q = None if args.q in (None, "opt") else float(args.q)
            policy = measure.build_reversal(pair, q=q, max_reversals=args.k)
    if args.json:
        doc = {
            "label": gate.label,
            "arity": gate.arity,
            "kind": gate.kind,
            "logically_reversible": gate.logically_reversible,
            "matrix": _matrix_doc(gate.matrix),
        }
        if pair is not None:
            doc["c"] = abs(pair.c)
            doc["m0"] = _matrix_doc(pair.m0)
            doc["m1"] = _matrix_doc(pair.m1)
        if policy is not None:
            doc["q"] = abs(policy.q)
            doc["r0"] = _matrix_doc(policy.r0)
            doc["r1"] = _matrix_doc(policy.r1)
        print(circuit.dumps_json(doc))
        return EXIT_OK
    print(f"label: {gate.label}")
    print(f"arity: {gate.arity}")
    print(f"kind: {gate.kind}")
    print(f"logically reversible: {gate.logically_reversible}")
    print("matrix:")
    sys.stdout.write(format_matrix(gate.matrix))
    if pair is not None:
        print(f"success operator (c={abs(pair.c)!r}):")
        sys.stdout.write(format_matrix(pair.m0))
        print("failure operator:")
        sys.stdout.write(format_matrix(pair.m1))
    if policy is not None:
        print(f"reversal success operator (q={abs(policy.q)!r}):")
        sys.stdout.write(format_matrix(policy.r0))
        print("reversal failure operator:")
        sys.stdout.write(format_matrix(policy.r1))
    return EXIT_OK


_COMMANDS = {
    "simulate": _cmd_simulate,
    "synth": _cmd_synth,
    "approx": _cmd_approx,
    "demo-nand": _cmd_demo_nand,
    "demo-al": _cmd_demo_al,
    "probe": _cmd_probe,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except DegenerateBranchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (NuqcError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
