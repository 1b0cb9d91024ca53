"""``cohere`` command-line front end.

Exit codes: 0 success, 1 validation error (bad matrix file, violated
invariant, failed verification), 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import basis_opt, measures, probe, qmat, suites, swapcirc
from .sampling import SeededStream

SCHEMA = 1
DEFAULT_SEED = 20160101


class ValidationError(Exception):
    pass


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _doc(payload: dict) -> dict:
    return {"schema": SCHEMA, **payload}


def _emit_json(payload: dict) -> str:
    return json.dumps(_doc(payload), indent=2) + "\n"


def _emit_csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) if isinstance(v, float) else v for v in r])
    return buf.getvalue()


def _emit_flat(payload: dict, fmt: str) -> str:
    if fmt == "json":
        return _emit_json(payload)
    flat = {k: v for k, v in _doc(payload).items() if not isinstance(v, (dict, list))}
    return _emit_csv(list(flat), [list(flat.values())])


def _load_state(path: str) -> np.ndarray:
    try:
        return qmat.load_density(path)
    except (qmat.InvalidStateError, qmat.PreconditionError) as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def _load_unitary(path: str) -> np.ndarray:
    try:
        return qmat.as_unitary(qmat.load_matrix(path))
    except (qmat.InvalidStateError, qmat.PreconditionError) as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def _cfg(args) -> basis_opt.OptimizerConfig:
    return basis_opt.OptimizerConfig(restarts=args.restarts, max_iters=args.max_iters,
                                     tol=args.tol, stream=SeededStream(args.seed))


# -- subcommands ---------------------------------------------------------------

def cmd_measure(args) -> str:
    rho = _load_state(args.state)
    rep = measures.measure_report(rho, args.log_base, with_c1=args.with_c1,
                                  cfg=_cfg(args) if args.with_c1 else None)
    return _emit_flat(rep.to_dict(), args.output)


def cmd_optimize(args) -> str:
    rho = _load_state(args.state)
    res = basis_opt.maximize_over_basis(rho, args.objective, _cfg(args), args.log_base)
    payload = {
        "objective": args.objective,
        "value": res.value,
        "iterations": res.iterations,
        "converged": res.converged,
        "restart": res.restart,
        "seed": args.seed,
    }
    if args.output == "json":
        payload["unitary"] = qmat.matrix_to_doc(res.unitary)
    return _emit_flat(payload, args.output)


def cmd_swap_test(args) -> str:
    rho = _load_state(args.state)
    try:
        prob = swapcirc.swap_test_probability(rho, args.copies)
    except qmat.PreconditionError as exc:
        raise ValidationError(str(exc)) from exc
    payload = {"copies": args.copies, "probability": prob, "moment": 2 * prob - 1}
    if args.shots is not None:
        if args.shots < 1:
            raise ValidationError("--shots must be positive")
        rec = swapcirc.sample_swap_test(rho, args.copies, args.shots, SeededStream(args.seed))
        payload.update(shots=rec.shots, plus_count=rec.plus_count, estimate=rec.estimate,
                       seed=args.seed)
    return _emit_flat(payload, args.output)


def _parse_bloch(text: str) -> probe.BlochVector:
    try:
        parts = [float(x) for x in text.split(",")]
        return probe.BlochVector.of(parts)
    except ValueError as exc:
        raise ValidationError(f"--bloch: {exc}") from exc


def cmd_probe(args) -> str:
    if args.qom:
        r1, r2 = (_load_state(p) for p in args.qom)
        if r1.shape != r2.shape:
            raise ValidationError("QOM states must share a dimension")
        ov, dc = probe.qom_overlap(r1, r2)
        payload = {"mode": "qom", "overlap": ov, "delta_c": dc,
                   "delta_c_circuit": probe.qom_delta_via_circuit(r1, r2)}
        return _emit_flat(payload, args.output)

    bloch = _parse_bloch(args.bloch)
    if args.dqc1 is not None:
        if args.dqc1 < 1:
            raise ValidationError("--dqc1 needs a positive qubit count")
        system = qmat.maximally_mixed(2**args.dqc1)
    elif args.system:
        system = _load_state(args.system)
    else:
        raise ValidationError("probe needs --system, --dqc1 or --qom")
    us = [_load_unitary(p) for p in args.unitary or []]
    gates = [_load_unitary(p) for p in args.gate] if args.gate else None
    try:
        scheme = probe.ProbeScheme(bloch, system, us, gates)
    except qmat.PreconditionError as exc:
        raise ValidationError(str(exc)) from exc
    terms = probe.probe_terms(scheme)
    rows = []
    for path, u, dc in zip(args.unitary or [], us, terms):
        t = probe.overlap(system, u)
        rows.append({"unitary": path, "delta_c": dc, "trace_re": t.real, "trace_im": t.imag,
                     "normalized_trace_abs": abs(t)})
    # other measures of the final probe, for information only; the cost uses c2
    finals = [measures.measure_report(probe.final_probe_closed(bloch, system, u), args.log_base).to_dict()
              for u in us]
    payload = {"mode": "dqc1" if args.dqc1 is not None else "general",
               "bloch": [bloch.p1, bloch.p2, bloch.p3], "cost": float(sum(terms))}
    if gates is not None:
        payload["gate_cost"] = probe.probe_cost(scheme, mode="gates")
    if args.output == "csv":
        return _emit_csv(["unitary", "delta_c", "trace_re", "trace_im", "normalized_trace_abs"],
                         [list(r.values()) for r in rows])
    for r, fin in zip(rows, finals):
        r["final_probe"] = fin
    payload["terms"] = rows
    return _emit_json(payload)


def cmd_verify(args) -> str:
    names = list(suites.SUITES) if args.suite == "all" else [args.suite]
    lines = []
    failed = False
    for name in names:
        res = suites.run_suite(name, args.samples, args.seed, args.jobs)
        failed |= not res.ok
        lines.append(f"suite={name} seed={args.seed} samples={res.samples} "
                     f"passed={res.passed} failed={res.samples - res.passed}")
        if res.failures:
            lines.append(f"  failing samples: {res.failures[:20]}")
    out = "\n".join(lines) + "\n"
    if failed:
        raise ValidationError(out.rstrip() + "\nverification failed")
    return out


def _grid(points: int) -> np.ndarray:
    if points < 2:
        raise ValidationError("--points must be at least 2")
    return np.linspace(0.0, 1.0, points)


def cmd_sweep(args) -> str:
    grid = _grid(args.points)
    if args.preset == "qom-overlap":
        header = ["overlap", "delta_c", "delta_c_circuit"]
        rows = []
        ket0 = qmat.pure_state([1, 0])
        for t in grid:
            psi = qmat.pure_state([np.sqrt(t), np.sqrt(1 - t)])
            ov, dc = probe.qom_overlap(ket0, psi)
            rows.append([float(t), dc, probe.qom_delta_via_circuit(ket0, psi)])
    elif args.preset == "purity":
        header = ["bloch_radius", "purity", "c2", "c_re", "c_skew", "c_trace"]
        rows = []
        for r in grid:
            rep = measures.measure_report(probe.probe_state((0, 0, r)), args.log_base)
            rows.append([float(r), rep.purity, rep.c2, rep.c_re, rep.c_skew, rep.c_trace])
    elif args.preset == "dqc1-phase":
        header = ["phase_over_pi", "normalized_trace_abs", "delta_c"]
        rows = []
        for s in grid:
            tau, dc = probe.dqc1_delta(np.diag([1, np.exp(1j * np.pi * s)]), 1.0)
            rows.append([float(s), abs(tau), dc])
    else:  # argparse restricts choices
        raise ValidationError(f"unknown preset {args.preset}")
    if args.output == "csv":
        return _emit_csv(header, rows)
    return _emit_json({"preset": args.preset, "columns": header, "rows": rows})


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", choices=("json", "csv"), default=None,
                        help="json (default) or csv (default for sweep)")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED,
                        help=f"unsigned 64-bit seed (default {DEFAULT_SEED})")
    common.add_argument("--log-base", type=float, default=2.0)
    common.add_argument("--jobs", type=int, default=None,
                        help="worker processes (default: available CPUs)")

    opt = argparse.ArgumentParser(add_help=False)
    opt.add_argument("--restarts", type=int, default=16)
    opt.add_argument("--max-iters", type=int, default=2000)
    opt.add_argument("--tol", type=float, default=1e-10)

    p = argparse.ArgumentParser(prog="cohere", description="Total quantum coherence toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    m = sub.add_parser("measure", parents=[common, opt], help="closed-form total coherence")
    m.add_argument("--state", required=True)
    m.add_argument("--with-c1", action="store_true", help="also optimize the l1 measure")
    m.set_defaults(func=cmd_measure)

    o = sub.add_parser("optimize", parents=[common, opt], help="maximize a coherence over bases")
    o.add_argument("--state", required=True)
    o.add_argument("--objective", choices=basis_opt.OBJECTIVES, default="l1")
    o.set_defaults(func=cmd_optimize)

    s = sub.add_parser("swap-test", parents=[common], help="simulate the swap-test circuit")
    s.add_argument("--state", required=True)
    s.add_argument("--copies", type=int, required=True)
    s.add_argument("--shots", type=int)
    s.set_defaults(func=cmd_swap_test)

    pr = sub.add_parser("probe", parents=[common], help="probing-scheme coherence cost")
    pr.add_argument("--bloch", default="0,0,1", help="P1,P2,P3 (default 0,0,1)")
    pr.add_argument("--system")
    pr.add_argument("--unitary", nargs="+")
    pr.add_argument("--gate", nargs="+", help="optional gate-level decomposition")
    pr.add_argument("--dqc1", type=int, metavar="N_QUBITS")
    pr.add_argument("--qom", nargs=2, metavar=("STATE1", "STATE2"))
    pr.set_defaults(func=cmd_probe)

    v = sub.add_parser("verify", parents=[common], help="run randomized property suites")
    v.add_argument("--suite", choices=["all", *suites.SUITES], default="all")
    v.add_argument("--samples", type=int, default=100)
    v.set_defaults(func=cmd_verify)

    w = sub.add_parser("sweep", parents=[common], help="emit plot-ready tables")
    w.add_argument("--preset", choices=("qom-overlap", "purity", "dqc1-phase"), required=True)
    w.add_argument("--points", type=int, default=11)
    w.set_defaults(func=cmd_sweep)
    return p


def dispatch(argv: list[str]) -> tuple[int, str, str]:
    """Run one command; returns ``(exit_code, stdout, stderr)``."""
    parser = build_parser()
    err = io.StringIO()
    try:
        old = sys.stderr
        sys.stderr = err
        try:
            args = parser.parse_args(argv)
        finally:
            sys.stderr = old
    except SystemExit as exc:
        return int(exc.code or 0), "", err.getvalue()
    if args.output is None:
        args.output = "csv" if args.command == "sweep" else "json"
    if not 0 <= args.seed < 2**64:
        return 2, "", "cohere: error: --seed must be an unsigned 64-bit integer\n"
    try:
        return 0, args.func(args), ""
    except ValidationError as exc:
        return 1, "", f"cohere: {exc}\n"
    except (qmat.InvalidStateError, qmat.PreconditionError, swapcirc.InconsistentMomentsError) as exc:
        return 1, "", f"cohere: {exc}\n"


def main(argv: list[str] | None = None) -> int:
    code, out, err = dispatch(sys.argv[1:] if argv is None else argv)
    if out:
        sys.stdout.write(out)
    if err:
        sys.stderr.write(err)
    return code


if __name__ == "__main__":
    sys.exit(main())
