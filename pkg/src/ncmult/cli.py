"""Command-line front end.

Subcommands::

    ncmult svf            --model M --operator X
    ncmult norm           --model M --operator X (--p P | --phi F)
    ncmult dual-norm      --model M --operator X (--phi F | --phi-star F)
    ncmult mult-norm      --model M --operator W (--p P --q Q | --phi1 A --phi2 B --phi3 C | --psi S --phi2 B)
    ncmult compact        --model M --operator W [--p P --q Q | --phi1 .. | --psi ..] [--eps 0.5,0.1]
    ncmult counterexample e1 --p 1 --q 2 --N 20
    ncmult verify         --suite all --seed 42

``--model``, ``--operator`` and every Orlicz flag accept inline JSON or
``@path``.  JSON reports have the shape ``{"header": ..., "body": ...}``;
the header holds the timestamp and timings, so bodies of identical runs are
byte-identical.

Exit codes: 0 success, 1 input error, 2 hypothesis violation or an
``undetermined`` / ``not_applicable`` verdict, 3 failures in ``verify``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from . import multipliers as mp
from . import norms
from . import orlicz as oz
from . import verification
from .operator_model import AlgebraModel, OperatorElement, singular_values
from .serialization import InputError, dumps, encode, model_from_dict, operator_from_dict, orlicz_from_dict, parse_json_arg

EXIT_OK, EXIT_INPUT, EXIT_HYPOTHESIS, EXIT_REFUTED = 0, 1, 2, 3


# ------------------------------------------------------------ arguments


class _Parser(argparse.ArgumentParser):
    """Usage errors are input errors (exit 1); argparse would use 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _add_common(p: argparse.ArgumentParser, operator: bool = True) -> None:
    p.add_argument("--model", required=True, help="algebra model (inline JSON or @file)")
    if operator:
        p.add_argument("--operator", required=True, help="operator element (inline JSON or @file)")


def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "csv", "text"), default="json")


def _add_sampling(p: argparse.ArgumentParser) -> None:
    p.add_argument("--trials", type=int, default=1000, help="random samples for cross-checks (default 1000)")
    p.add_argument("--seed", type=int, default=42, help="sampling seed (default 42)")


def _add_orlicz_triplet(p: argparse.ArgumentParser) -> None:
    for name in ("phi1", "phi2", "phi3", "psi"):
        p.add_argument(f"--{name}", help=f"Orlicz function {name} (inline JSON or @file)")
    p.add_argument("--grid", default="log:1e-4:1e4:64", help='grid spec, e.g. "log:1e-4:1e4:64" or "list:0.1,1,10"')


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="ncmult", description="Multiplication operators on non-commutative function spaces.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("svf", help="singular value function of an operator")
    _add_common(p)
    _add_output(p)

    p = sub.add_parser("norm", help="L^p or Luxemburg norm")
    _add_common(p)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--p", type=float)
    g.add_argument("--phi")
    p.add_argument("--method", choices=("bisection", "closed_form"))
    _add_output(p)

    p = sub.add_parser("dual-norm", help="Orlicz (Koethe dual) norm")
    _add_common(p)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--phi", help="base function; its conjugate is used")
    g.add_argument("--phi-star", dest="phi_star", help="conjugate function given directly")
    _add_output(p)

    p = sub.add_parser("mult-norm", help="norm of x -> w x between two spaces")
    _add_common(p)
    p.add_argument("--p", type=float)
    p.add_argument("--q", type=float)
    p.add_argument("--N", type=int, default=20, help="dyadic witnesses for non-atomic support")
    _add_orlicz_triplet(p)
    _add_sampling(p)
    _add_output(p)

    p = sub.add_parser("compact", help="compactness verdict for x -> w x")
    _add_common(p)
    p.add_argument("--p", type=float)
    p.add_argument("--q", type=float)
    p.add_argument("--eps", help="comma-separated thresholds for the endomorphic table")
    _add_orlicz_triplet(p)
    _add_output(p)

    p = sub.add_parser("counterexample", help="reproduce a counterexample table")
    p.add_argument("name", choices=("e1",))
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--q", type=float, default=2.0)
    p.add_argument("--N", type=int, default=20)
    _add_output(p)

    p = sub.add_parser("verify", help="run property suites")
    p.add_argument("--suite", default="all", help=f"'all', 'acceptance' or a comma list of: {', '.join(verification.SUITES)}")
    p.add_argument("--seed", type=int, default=42)
    _add_output(p)
    return ap


# ---------------------------------------------------------------- input


def _load_model(args) -> AlgebraModel:
    return model_from_dict(parse_json_arg(args.model, "--model"))


def _load_operator(args, model: AlgebraModel) -> OperatorElement:
    return operator_from_dict(parse_json_arg(args.operator, "--operator"), model)


def _load_phi(arg: str | None, flag: str) -> oz.OrliczFunction | None:
    if arg is None:
        return None
    return orlicz_from_dict(parse_json_arg(arg, flag), flag.lstrip("-"))


def _grid(args) -> np.ndarray:
    try:
        return oz.parse_grid(args.grid)
    except ValueError as exc:
        raise InputError(str(exc), "--grid") from None


def _exponent(value: float | None, flag: str) -> float:
    if value is None:
        raise InputError("required for this mode", flag)
    if not (value >= 1):
        raise InputError(f"exponent must be >= 1, got {value}", flag)
    return value


# --------------------------------------------------------------- output


def _kv_csv(d: dict) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["field", "value"])
    for k, v in sorted(encode(d).items()):
        wr.writerow([k, json.dumps(v) if isinstance(v, (dict, list)) else v])
    return buf.getvalue()


def _text(d: Any, indent: int = 0) -> str:
    pad = "  " * indent
    lines = []
    if isinstance(d, dict):
        for k, v in d.items():
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}{k}:")
                lines.append(_text(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {v}")
    elif isinstance(d, list):
        for v in d:
            if isinstance(v, (dict, list)):
                lines.append(f"{pad}-")
                lines.append(_text(v, indent + 1))
            else:
                lines.append(f"{pad}- {v}")
    else:
        lines.append(f"{pad}{d}")
    return "\n".join(lines)


def _emit(args, command: str, body: Any, csv_text: str | None, started: float, timings: dict | None = None) -> None:
    fmt = args.format
    if fmt == "json":
        header = {
            "command": command,
            "version": __version__,
            "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
            "timings": {"total_seconds": round(time.perf_counter() - started, 6), **(timings or {})},
        }
        # header first so that the body can be compared byte for byte
        text = '{\n"header": ' + json.dumps(encode(header), sort_keys=True) + ',\n"body": ' + dumps(body).rstrip("\n") + "\n}\n"
    elif fmt == "csv":
        text = csv_text if csv_text is not None else _kv_csv(encode(body))
    else:
        text = _text(encode(body)) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def split_report(text: str) -> tuple[dict, str]:
    """Header dict and raw body text of a JSON report written by this CLI."""
    head, _, body = text.partition('\n"body": ')
    header = json.loads(head[len('{\n"header": ') :].rstrip(","))
    return header, body[: -len("\n}\n")]


# -------------------------------------------------------------- commands


def cmd_svf(args, started) -> int:
    model = _load_model(args)
    x = _load_operator(args, model)
    mu = singular_values(model, x)
    body = {"pieces": [{"length": L, "value": v} for L, v in mu.pieces], "support": mu.support, "sup": mu.sup}
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["start", "end", "value"])
    start = 0.0
    for L, v in mu.pieces:
        wr.writerow([repr(start), "inf" if math.isinf(start + L) else repr(start + L), repr(v)])
        start += L
    _emit(args, "svf", body, buf.getvalue(), started)
    return EXIT_OK


def cmd_norm(args, started) -> int:
    model = _load_model(args)
    x = _load_operator(args, model)
    if args.phi is not None:
        res = norms.luxemburg_norm(_load_phi(args.phi, "--phi"), model, x, args.method)
    else:
        res = norms.lp_norm(_exponent(args.p, "--p"), model, x)
    _emit(args, "norm", res, None, started)
    return EXIT_OK


def cmd_dual_norm(args, started) -> int:
    model = _load_model(args)
    x = _load_operator(args, model)
    star = _load_phi(args.phi_star, "--phi-star") if args.phi_star else oz.conjugate(_load_phi(args.phi, "--phi"))
    res = norms.orlicz_dual_norm(star, model, x)
    _emit(args, "dual-norm", res, None, started)
    return EXIT_OK


def _report_exit(rep: mp.MultiplierReport, verdict: bool = False) -> int:
    if verdict:
        return EXIT_HYPOTHESIS if rep.compact_verdict == "not_applicable" else EXIT_OK
    return EXIT_HYPOTHESIS if rep.bounded == "undetermined" else EXIT_OK


def cmd_mult_norm(args, started) -> int:
    model = _load_model(args)
    w = _load_operator(args, model)
    if args.psi is not None:
        phi2 = _load_phi(args.phi2, "--phi2")
        if phi2 is None:
            raise InputError("composition mode needs --phi2 alongside --psi", "--phi2")
        rep = mp.bounded_multiplier_composition(model, w, _load_phi(args.psi, "--psi"), phi2, _grid(args), args.trials, args.seed)
    elif args.phi1 is not None or args.phi3 is not None:
        phis = [_load_phi(getattr(args, n), f"--{n}") for n in ("phi1", "phi2", "phi3")]
        for n, f in zip(("phi1", "phi2", "phi3"), phis):
            if f is None:
                raise InputError("inverse-factorisation mode needs --phi1, --phi2 and --phi3", f"--{n}")
        rep = mp.bounded_multiplier_inverse_factorization(model, w, *phis, grid=_grid(args), trials=args.trials, seed=args.seed)
    else:
        p, q = _exponent(args.p, "--p"), _exponent(args.q, "--q")
        if p > q:
            rep = mp.exact_norm_decreasing(model, w, p, q, args.trials, args.seed)
        elif p < q:
            rep = mp.exact_norm_increasing(model, w, p, q, args.trials, args.seed, args.N)
        else:
            rep = mp.endomorphic_norm(model, w, p, args.trials, args.seed)
    _emit(args, "mult-norm", rep, rep.to_csv(), started)
    return _report_exit(rep)


def cmd_compact(args, started) -> int:
    model = _load_model(args)
    w = _load_operator(args, model)
    if args.psi is not None or args.phi1 is not None:
        phi1 = _load_phi(args.phi1, "--phi1")
        phi2 = _load_phi(args.phi2, "--phi2")
        phi3 = _load_phi(args.phi3, "--phi3")
        psi = _load_phi(args.psi, "--psi")
        if phi2 is None or phi1 is None:
            raise InputError("Orlicz compactness needs --phi1 and --phi2", "--phi2")
        if psi is None and phi3 is None:
            raise InputError("give --phi3 (inverse factorisation) or --psi (composition)", "--phi3")
        mode = "composition" if psi is not None else "inverse_factorization"
        rep = mp.compact_orlicz(model, w, phi1, phi2, phi3, mode=mode, grid=_grid(args), psi=psi)
    elif args.p is not None or args.q is not None:
        rep = mp.compact_lp_increasing(model, w, _exponent(args.p, "--p"), _exponent(args.q, "--q"))
    else:
        eps = None
        if args.eps:
            try:
                eps = [float(e) for e in args.eps.split(",")]
            except ValueError:
                raise InputError(f"expected comma-separated numbers, got {args.eps!r}", "--eps") from None
        rep = mp.compact_endomorphic(model, w, eps)
    _emit(args, "compact", rep, rep.to_csv(), started)
    return _report_exit(rep, verdict=True)


def cmd_counterexample(args, started) -> int:
    tab = mp.tensor_counterexample_e1(args.p, args.q, args.N)
    _emit(args, "counterexample", tab, tab.to_csv(), started)
    return EXIT_OK


def _suite_names(spec: str) -> list[str]:
    if spec == "all":
        return list(verification.SUITES)
    if spec == "acceptance":
        return list(verification.ACCEPTANCE_SUITES)
    names = [s.strip() for s in spec.split(",") if s.strip()]
    bad = [n for n in names if n not in verification.SUITES]
    if bad or not names:
        raise InputError(f"unknown suite(s) {bad}; available: all, acceptance, {', '.join(verification.SUITES)}", "--suite")
    return names


def cmd_verify(args, started) -> int:
    names = _suite_names(args.suite)
    results, timings = [], {}
    for name in names:
        t0 = time.perf_counter()
        results.append(verification.run_suite(name, args.seed))
        timings[name] = round(time.perf_counter() - t0, 6)
    failures = sum(r.failures for r in results)
    body = {
        "seed": args.seed,
        "suites": [r.to_dict() for r in results],
        "summary": {
            "suites": len(results),
            "passed": sum(r.passed for r in results),
            "checks": sum(r.checks for r in results),
            "failures": failures,
        },
    }
    rows = io.StringIO()
    wr = csv.writer(rows, lineterminator="\n")
    wr.writerow(["suite", "property", "checks", "failures", "worst_residual", "tolerance"])
    for r in results:
        for prop, st in sorted(r.properties.items()):
            wr.writerow([r.name, prop, st.checks, st.failures, encode(st.worst), st.tolerance])
    if args.format == "text":
        lines = []
        for r in results:
            lines.append(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.checks} checks, {r.failures} failures")
            for prop, st in sorted(r.properties.items()):
                if st.failures:
                    lines.append(f"    {prop}: {st.failures}/{st.checks} failed; first {st.first_failure}")
        text = "\n".join(lines) + "\n"
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
    else:
        _emit(args, "verify", body, rows.getvalue(), started, {"suites": timings})
    return EXIT_REFUTED if failures else EXIT_OK


COMMANDS = {
    "svf": cmd_svf,
    "norm": cmd_norm,
    "dual-norm": cmd_dual_norm,
    "mult-norm": cmd_mult_norm,
    "compact": cmd_compact,
    "counterexample": cmd_counterexample,
    "verify": cmd_verify,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    started = time.perf_counter()
    try:
        return COMMANDS[args.command](args, started)
    except InputError as exc:
        print(f"ncmult: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except mp.ParameterError as exc:
        print(f"ncmult: invalid parameters: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except mp.HypothesisViolation as exc:
        print(f"ncmult: hypothesis violation: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (ValueError, TypeError, oz.DomainError) as exc:
        print(f"ncmult: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
