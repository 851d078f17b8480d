"""Command-line front end emitting fixture-stable CSV/JSON/table output.

Exit codes: 0 success, 2 usage or validation error, 3 numeric failure.
Every numeric printed is recomputed from module operations and formatted
at 12 significant digits; identical invocations produce byte-identical
output files.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import kernel
from .audit import (
    IonParams,
    audit_ion,
    audit_minimal,
    report_to_json,
    scan_alpha,
    scan_to_csv,
)
from .errors import NumericError, ValidationError
from .formatting import fmt, fnum
from .locc import run_once, sweep_latency, traces_to_csv, wire_mode
from .model import (
    ModelParams,
    build_hamiltonians,
    diffusion_period,
    e_a_closed,
    e_b_closed,
    ground_state_closed_form,
    ground_state_numeric,
    spectrum_closed_form,
)
from .protocol import evolve_branches, infused_energy, measure_alice, optimize_bob

__all__ = ["main", "entry"]


def _add_model_params(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--h", type=float, help="site field energy h > 0")
    parser.add_argument("--k", type=float, help="coupling energy k > 0")
    parser.add_argument(
        "--alpha", type=float, help="reparametrised point h = alpha*k with k = 1"
    )


def _resolve_params(args) -> ModelParams:
    has_hk = args.h is not None or args.k is not None
    has_alpha = args.alpha is not None
    if has_alpha and has_hk:
        raise ValidationError("supply either --h/--k or --alpha, not both")
    if has_alpha:
        return ModelParams.from_alpha(args.alpha)
    if args.h is None or args.k is None:
        raise ValidationError("supply both --h and --k, or --alpha")
    return ModelParams(h=args.h, k=args.k)


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_latencies(spec: str) -> list[float]:
    """Grid spec: `start:stop:step` (inclusive) or comma-separated values."""
    try:
        if ":" in spec:
            start_s, stop_s, step_s = spec.split(":")
            start, stop, step = float(start_s), float(stop_s), float(step_s)
            if step <= 0 or stop < start:
                raise ValidationError(f"bad latency range {spec!r}")
            count = int(round((stop - start) / step)) + 1
            return [start + i * step for i in range(count)]
        return [float(x) for x in spec.split(",")]
    except ValueError as exc:
        raise ValidationError(f"cannot parse latency grid {spec!r}") from exc


# --- model report ------------------------------------------------------------

def _model_rows(p: ModelParams) -> tuple[list[tuple[str, str, str, float, float]], float]:
    """Cross-checked rows (quantity, closed, numeric, residual, tolerance)."""
    hams = build_hamiltonians(p)
    closed = ground_state_closed_form(p)
    numeric = ground_state_numeric(hams)
    spectrum_c = spectrum_closed_form(p)
    spectrum_n = kernel.hermitian_eig(hams.h_tot).eigenvalues

    # Phase-align the numeric ground vector to the closed form for
    # amplitude-by-amplitude residuals (global phase is not physical).
    overlap = complex(np.vdot(numeric.state, closed.state))
    aligned = numeric.state * (overlap / abs(overlap))
    fidelity = abs(overlap) ** 2

    branches = measure_alice(closed)
    e_a_sim = infused_energy(branches, hams)
    peak_time = math.pi / (4.0 * p.k)
    evolved = evolve_branches(branches, hams, peak_time)
    hb_sim = sum(
        b.probability * kernel.expectation(b.state, hams.h_b) for b in evolved
    )
    extraction = optimize_bob(branches, hams, mode="family")

    rows = []

    def row(name, closed_v, numeric_v, tol, relative=False):
        resid = abs(numeric_v - closed_v)
        if relative:
            resid /= max(abs(closed_v), 1e-300)
        rows.append((name, fmt(closed_v), fmt(numeric_v), resid, tol))

    row("ground energy", 0.0, numeric.energy, 1e-10)
    for i in range(4):
        row(f"spectrum[{i}]", spectrum_c[i], float(spectrum_n[i]), 1e-9)
    basis = ("|++>", "|+->", "|-+>", "|-->")
    for i in range(4):
        row(
            f"amplitude {basis[i]}",
            float(closed.state[i].real),
            float(aligned[i].real),
            1e-10,
        )
    row("ground fidelity", 1.0, fidelity, 1e-12)
    row("e_a", e_a_closed(p), e_a_sim, 1e-10, relative=True)
    row("e_b", e_b_closed(p), extraction.extracted_energy, 1e-6, relative=True)
    row("hb peak", e_a_closed(p), hb_sim, 1e-9)
    worst = max(r[3] / r[4] for r in rows)
    return rows, worst


def cmd_model(args) -> int:
    p = _resolve_params(args)
    rows, worst = _model_rows(p)
    period = diffusion_period(p)
    status = "ok" if worst <= 1.0 else "residual-failure"

    if args.format == "table":
        lines = ["minimal-model cross-check report"]
        lines.append(f"{'h':24}{fmt(p.h)}")
        lines.append(f"{'k':24}{fmt(p.k)}")
        lines.append(f"{'alpha':24}{fmt(p.alpha)}")
        lines.append(f"{'diffusion period':24}{fmt(period)}")
        lines.append(
            f"{'quantity':24}{'closed-form':20}{'numeric':20}{'residual':12}tolerance"
        )
        for name, closed_v, numeric_v, resid, tol in rows:
            lines.append(
                f"{name:24}{closed_v:20}{numeric_v:20}{resid:<12.3e}{tol:.0e}"
            )
        lines.append(f"{'status':24}{status}")
        text = "\n".join(lines) + "\n"
    elif args.format == "csv":
        lines = ["quantity,closed,numeric,residual,tolerance"]
        lines.append(f"h,{fmt(p.h)},,,")
        lines.append(f"k,{fmt(p.k)},,,")
        lines.append(f"alpha,{fmt(p.alpha)},,,")
        lines.append(f"diffusion period,{fmt(period)},,,")
        for name, closed_v, numeric_v, resid, tol in rows:
            lines.append(f"{name},{closed_v},{numeric_v},{fmt(resid)},{tol:.0e}")
        lines.append(f"status,{status},,,")
        text = "\n".join(lines) + "\n"
    else:
        payload = {
            "h": fnum(p.h),
            "k": fnum(p.k),
            "alpha": fnum(p.alpha),
            "diffusion_period": fnum(period),
            "checks": [
                {
                    "quantity": name,
                    "closed": float(closed_v),
                    "numeric": float(numeric_v),
                    "residual": fnum(resid),
                    "tolerance": tol,
                }
                for name, closed_v, numeric_v, resid, tol in rows
            ],
            "status": status,
        }
        text = json.dumps(payload, indent=2) + "\n"

    _emit(text, args.output)
    if status != "ok":
        raise NumericError(f"model cross-check residual above tolerance (x{worst:.2f})")
    return 0


def cmd_scan_alpha(args) -> int:
    result = scan_alpha(
        alpha_min=args.min_alpha, alpha_max=args.max_alpha, points=args.points
    )
    _emit(scan_to_csv(result), args.output)
    return 0


def cmd_run(args) -> int:
    p = _resolve_params(args)
    if args.wire:
        endpoint = args.listen if args.wire == "alice" else args.connect
        if not endpoint:
            raise ValidationError(
                "wire mode needs --listen (alice) or --connect (bob)"
            )
        trace = wire_mode(
            args.wire, endpoint, p, args.latency, policy=args.policy, mode=args.mode
        )
    else:
        trace = run_once(p, args.latency, policy=args.policy, mode=args.mode)
    _emit(traces_to_csv([trace]), args.output)
    return 0


def cmd_sweep(args) -> int:
    p = _resolve_params(args)
    grid = _parse_latencies(args.latencies)
    traces = sweep_latency(p, grid, policy=args.policy, mode=args.mode)
    _emit(traces_to_csv(traces), args.output)
    return 0


def cmd_audit(args) -> int:
    if args.protocol == "minimal":
        p = _resolve_params(args)
        report = audit_minimal(p, args.time)
    else:
        ip = IonParams(
            gamma_n=args.gamma, zeta_n=args.zeta, nu=args.nu, phi=args.phi
        )
        report = audit_ion(ip, args.time)
    _emit(report_to_json(report) + "\n", args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qetsim",
        description="minimal quantum-energy-teleportation laboratory",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    mp = sub.add_parser("model", help="cross-checked model report")
    _add_model_params(mp)
    mp.add_argument("--format", choices=("table", "csv", "json"), default="table")
    mp.add_argument("--output", help="write to file instead of stdout")
    mp.set_defaults(func=cmd_model)

    sp = sub.add_parser("scan-alpha", help="tabulate f(alpha) as CSV")
    sp.add_argument("--points", type=int, default=10_000)
    sp.add_argument("--min-alpha", type=float, default=0.01)
    sp.add_argument("--max-alpha", type=float, default=20.0)
    sp.add_argument("--output")
    sp.set_defaults(func=cmd_scan_alpha)

    rp = sub.add_parser("run", help="one protocol round, trace CSV")
    _add_model_params(rp)
    rp.add_argument("--latency", type=float, required=True)
    rp.add_argument(
        "--policy", choices=("optimize", "closed-form-theta"), default="optimize"
    )
    rp.add_argument("--mode", choices=("family", "full"), default="family")
    rp.add_argument("--wire", choices=("alice", "bob"))
    rp.add_argument("--listen", help="host:port to serve on (alice)")
    rp.add_argument("--connect", help="host:port to connect to (bob)")
    rp.add_argument("--output")
    rp.set_defaults(func=cmd_run)

    wp = sub.add_parser("sweep", help="latency sweep, trace CSV")
    _add_model_params(wp)
    wp.add_argument(
        "--latencies", required=True, help="start:stop:step or comma-separated"
    )
    wp.add_argument(
        "--policy", choices=("optimize", "closed-form-theta"), default="optimize"
    )
    wp.add_argument("--mode", choices=("family", "full"), default="family")
    wp.add_argument("--output")
    wp.set_defaults(func=cmd_sweep)

    ap = sub.add_parser("audit", help="energy-time uncertainty audit, JSON")
    asub = ap.add_subparsers(dest="protocol", required=True)

    amp = asub.add_parser("minimal", help="minimal protocol audit")
    _add_model_params(amp)
    amp.add_argument("--time", type=float, required=True)
    amp.add_argument("--output")
    amp.set_defaults(func=cmd_audit)

    aip = asub.add_parser("ion", help="trapped-ion protocol audit")
    aip.add_argument("--gamma", type=float, required=True)
    aip.add_argument("--zeta", type=float, required=True)
    aip.add_argument("--nu", type=float, required=True)
    aip.add_argument("--phi", type=float, default=math.pi / 4.0)
    aip.add_argument("--time", type=float, required=True)
    aip.set_defaults(func=cmd_audit)
    aip.add_argument("--output")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"qetsim: error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"qetsim: numeric failure: {exc}", file=sys.stderr)
        return 3


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
