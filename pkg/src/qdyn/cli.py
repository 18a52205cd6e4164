"""Command-line interface.

Exit codes: 0 ok, 2 parse/validation error, 3 map is not CP,
4 non-unitary input, 5 degenerate post-selection.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from qdyn import chain as qchain
from qdyn.channel import ChoiMatrix, choi, classify
from qdyn.dilation import UniverseModel, kraus_from_dilation, swap_convert, swap_residual
from qdyn.errors import NotUnitaryError, QdynError, ZeroPostSelectionError
from qdyn.io import (
    DocumentError,
    channel_document,
    encode_complex,
    matrix_document,
    parse_chain_spec,
    parse_channel,
    parse_matrix,
    parse_measurement,
    parse_state,
    read_document,
    state_document,
    write_document,
)
from qdyn.linalg import frob_dist
from qdyn.states import bloch_vector, gell_mann_basis
from qdyn.weak import weak_transfer_matrix, weak_values

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_NOT_CP = 3
EXIT_NOT_UNITARY = 4
EXIT_ZERO_POSTSELECTION = 5


def fmt(x: float) -> str:
    return f"{x:.17g}"


def _dims(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid dims {text!r}; expected e.g. 2,2") from None
    if not dims or any(d < 1 for d in dims):
        raise argparse.ArgumentTypeError("dims must be positive integers")
    return dims


def _emit(args, report: dict, lines: list[str]) -> None:
    if args.format == "json":
        print(json.dumps(report))
    else:
        print("\n".join(lines))


def _fmt_matrix(m: np.ndarray) -> list[str]:
    return ["  " + "  ".join(fmt(v) for v in row) for row in np.real_if_close(m)]


# -- commands -----------------------------------------------------------------


def cmd_check_cp(args) -> int:
    doc = read_document(args.input)
    if doc["kind"] == "channel":
        ch = parse_channel(doc)
        c = choi(ch)
        tp_res = ch.tp_residual
    else:
        c = ChoiMatrix.square(parse_matrix(doc))
        tp_res = c.tp_residual
    verdict = classify(c, samples=args.samples, seed=args.seed, tol=args.tol)
    eig = c.eigenvalues()
    cp = bool(eig[0] >= -args.tol)
    tp = tp_res <= 1e-10
    label = ("CP" if cp else "not CP") + (", TP" if tp else ", not TP")
    scale = 1.0 if args.choi_norm == "unnormalized" else 1.0 / c.dim_in
    report = {
        "choi_eigenvalues": [float(x) * scale for x in eig],
        "choi_normalization": args.choi_norm,
        "tp_residual": tp_res,
        "class": verdict.value,
        "cp": cp,
        "tp": tp,
        "verdict": label,
    }
    lines = [
        "Choi eigenvalues (" + args.choi_norm + "): " + " ".join(fmt(x * scale) for x in eig),
        "TP residual ||sum K^dag K - 1||_F: " + fmt(tp_res),
        "class: " + verdict.value,
        label,
    ]
    _emit(args, report, lines)
    return EXIT_OK if cp else EXIT_NOT_CP


def cmd_dilate(args) -> int:
    u = parse_matrix(read_document(args.unitary))
    rho_e = parse_state(read_document(args.env))
    if args.dims is None or len(args.dims) != 2:
        raise DocumentError("--dims dS,dE is required")
    d_s, d_e = args.dims
    rho_s = np.eye(d_s) / d_s
    model = UniverseModel(d_s, d_e, u, rho_s=rho_s, rho_e=rho_e)
    ch = kraus_from_dilation(model)
    if args.out:
        write_document(channel_document(ch), args.out)
    report = {"n_kraus": len(ch), "tp_residual": ch.tp_residual}
    _emit(args, report, [f"Kraus operators: {len(ch)}", "TP residual: " + fmt(ch.tp_residual)])
    return EXIT_OK


def cmd_swap_convert(args) -> int:
    rho_se = parse_matrix(read_document(args.state))
    u = parse_matrix(read_document(args.unitary))
    if args.dims is None or len(args.dims) != 2:
        raise DocumentError("--dims n,dE is required")
    sigma_s, ch = swap_convert(rho_se, args.dims, u)
    res = swap_residual(rho_se, args.dims, u, ch)
    c_min = float(choi(ch).eigenvalues()[0])
    if args.out:
        write_document(channel_document(ch), args.out)
    report = {
        "n_kraus": len(ch),
        "residual": res,
        "tp_residual": ch.tp_residual,
        "choi_min_eigenvalue": c_min,
        "sigma_s": state_document(sigma_s)["data"],
    }
    lines = [
        f"Kraus operators: {len(ch)}",
        "equivalence residual ||Phi(sigma_S) - tr_E(U rho_SE U^dag)||_F: " + fmt(res),
        "TP residual: " + fmt(ch.tp_residual),
        "min Choi eigenvalue: " + fmt(c_min),
    ]
    _emit(args, report, lines)
    return EXIT_OK


def _step_record(step: qchain.ChainStep) -> dict:
    rec = {
        "kind": "step",
        "n": step.n,
        "state": state_document(step.rho),
        "p": [float(x) for x in step.p],
        "transfer": None,
        "degenerate": None,
    }
    if step.transfer is not None:
        rec["transfer"] = matrix_document(step.transfer.m)
        rec["degenerate"] = [bool(f) for f in step.transfer.degenerate]
    return rec


def cmd_chain_run(args) -> int:
    ctype, rho0, chain, params = parse_chain_spec(read_document(args.spec))
    if args.steps < 0:
        raise DocumentError("--steps must be non-negative")
    traj = qchain.run_chain(rho0, chain, args.steps)
    header = {
        "kind": "header",
        "chain": ctype,
        "steps": args.steps,
        "dim": int(rho0.shape[0]),
        "initial": state_document(rho0),
        "params": {k: (encode_complex(v) if isinstance(v, complex) else v) for k, v in params.items()},
    }
    records = [_step_record(s) for s in traj[1:]]
    if records and ctype == "amplitude-damping":
        records[-1]["asymptotic"] = _damping_summary(traj, params)
    out_lines = [json.dumps(header)] + [json.dumps(r) for r in records]
    text = "\n".join(out_lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
        return EXIT_OK
    last = traj[-1]
    lines = [f"{ctype}: {args.steps} steps written to {args.out}"]
    if last.transfer is not None:
        lines.append(f"last transfer matrix (n={last.n}):")
        lines += _fmt_matrix(last.transfer.m)
    if records and "asymptotic" in records[-1]:
        a = records[-1]["asymptotic"]
        lines.append("closed-form state max deviation: " + fmt(a["state_max_deviation"]))
        if a["upsilon_inf_distance"] is not None:
            lines.append("||Upsilon_last - Upsilon_inf||_F: " + fmt(a["upsilon_inf_distance"]))
    print("\n".join(lines))
    return EXIT_OK


def _damping_summary(traj, params) -> dict:
    g, a, b = params["gamma"], params["alpha"], params["beta"]
    dev = max(
        frob_dist(s.rho, qchain.amplitude_damping_analytic(s.n, a, b, g)) for s in traj
    )
    last = traj[-1]
    summary = {
        "state_max_deviation": dev,
        "upsilon_inf": matrix_document(qchain.UPSILON_INF),
        "upsilon_inf_distance": None,
        "closed_form_transfer_deviation": None,
    }
    if last.transfer is not None:
        summary["upsilon_inf_distance"] = frob_dist(last.transfer.m, qchain.UPSILON_INF)
        if abs(abs(b) - 1) < 1e-12:
            closed = qchain.amplitude_damping_transfer_closed_form(last.n, g)
            summary["closed_form_transfer_deviation"] = frob_dist(last.transfer.m, closed.m)
    return summary


def cmd_transfer_matrix(args) -> int:
    rho = parse_state(read_document(args.state))
    first = parse_measurement(read_document(args.first))
    second = parse_measurement(read_document(args.second))
    if args.weak:
        t = weak_transfer_matrix(rho, first, second)
        m, flags = t.m, t.degenerate
    else:
        t = qchain.transfer_matrix(rho, first, second)
        m, flags = t.m, t.degenerate
    if args.out:
        write_document(matrix_document(m), args.out)
    report = {
        "transfer": matrix_document(m)["data"],
        "degenerate": [bool(f) for f in flags],
        "column_sums": [encode_complex(s) for s in m.sum(axis=0)],
    }
    lines = ["weak transfer matrix:" if args.weak else "transfer matrix:"]
    lines += _fmt_matrix(m)
    lines.append("degenerate columns: " + (", ".join(str(i) for i, f in enumerate(flags) if f) or "none"))
    _emit(args, report, lines)
    return EXIT_OK


def cmd_weak(args) -> int:
    rho = parse_state(read_document(args.state))
    a = parse_matrix(read_document(args.observable))
    second = parse_measurement(read_document(args.post))
    vals = weak_values(a, second, rho, skip_degenerate=args.skip_degenerate)
    rows = []
    total = 0j
    for j, wv in enumerate(vals):
        if wv is None:
            rows.append({"j": j, "q": 0.0, "re": None, "im": None, "degenerate": True})
            continue
        total += wv.value * wv.weight
        rows.append({"j": j, "q": wv.weight, "re": wv.value.real, "im": wv.value.imag, "degenerate": False})
    expect = complex(np.trace(a @ rho))
    resid = abs(total - expect)
    report = {"rows": rows, "expectation": encode_complex(expect), "residual": resid}
    lines = ["j  q  Re(w)  Im(w)"]
    for r in rows:
        if r["degenerate"]:
            lines.append(f"{r['j']}  0  -  -")
        else:
            lines.append(f"{r['j']}  {fmt(r['q'])}  {fmt(r['re'])}  {fmt(r['im'])}")
    lines.append("<A> = " + fmt(expect.real) + "; |sum_j w_j q_j - tr(A rho)| = " + fmt(resid))
    _emit(args, report, lines)
    return EXIT_OK


def cmd_bloch(args) -> int:
    rho = parse_state(read_document(args.state))
    basis = gell_mann_basis(rho.shape[0])
    f = bloch_vector(rho, basis)
    report = {"dim": int(rho.shape[0]), "bloch": [float(x) for x in f]}
    _emit(args, report, [f"f[{i + 1}] = {fmt(x)}" for i, x in enumerate(f)])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qdyn", description="Open-system quantum dynamics toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=func)
        p.add_argument("--format", choices=("table", "json"), default="table")
        return p

    p = add("check-cp", cmd_check_cp, "Choi-matrix complete-positivity test of a channel or Choi matrix")
    p.add_argument("input")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--choi-norm", choices=("unnormalized", "state"), default="unnormalized")

    p = add("dilate", cmd_dilate, "Kraus operators from a joint unitary and an environment state")
    p.add_argument("--unitary", required=True)
    p.add_argument("--env", required=True)
    p.add_argument("--dims", type=_dims)
    p.add_argument("--out")

    p = add("swap-convert", cmd_swap_convert, "CP map for correlated system-environment dynamics")
    p.add_argument("--state", required=True)
    p.add_argument("--unitary", required=True)
    p.add_argument("--dims", type=_dims)
    p.add_argument("--out")

    p = add("chain-run", cmd_chain_run, "Run a measurement chain and write a JSON-lines trajectory")
    p.add_argument("spec")
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--out")

    p = add("transfer-matrix", cmd_transfer_matrix, "Transfer matrix between two measurements")
    p.add_argument("--state", required=True)
    p.add_argument("--first", required=True)
    p.add_argument("--second", required=True)
    p.add_argument("--weak", action="store_true")
    p.add_argument("--out")

    p = add("weak", cmd_weak, "Weak values for each post-selected outcome")
    p.add_argument("--state", required=True)
    p.add_argument("--observable", required=True)
    p.add_argument("--post", required=True)
    p.add_argument("--skip-degenerate", action="store_true")

    p = add("bloch", cmd_bloch, "Bloch coherence vector in the Gell-Mann basis")
    p.add_argument("--state", required=True)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NotUnitaryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_UNITARY
    except ZeroPostSelectionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ZERO_POSTSELECTION
    except (DocumentError, QdynError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
