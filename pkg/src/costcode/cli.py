"""Batch command-line front end.

Every computation is a subcommand taking JSON config files (cost model,
source) and writing CSV or JSON; report-style commands can also render a
matplotlib figure next to the delimited output via --plot.  All logarithmic
outputs are taken to base K (the code alphabet size); --log-base rescales the
documented log-valued display fields only.

Exit codes: 0 success, 2 configuration error, 3 numeric failure.  Errors are
reported as one JSON object on stderr.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys

from . import analysis, codec, cost_model, figures, sources, spectrum

#: canonical operation -> owning subcommand (coverage-tested)
COMMAND_TABLE = {
    "solve_cost_capacity": "capacity",
    "symbol_measure": "capacity",
    "validate_conditional_model": "capacity",
    "log_prob": "spectrum first",
    "entropy": "threshold first",
    "varentropy": "threshold second",
    "sample_self_info": "spectrum second",
    "enumerate_support": "code build",
    "gaussian_cdf": "threshold second",
    "gaussian_quantile": "threshold second",
    "first_order_spectrum": "spectrum first",
    "second_order_spectrum": "spectrum second",
    "strong_converse_diagnostic": "diagnose strong-converse",
    "build_exact_code": "code build",
    "encode": "code encode",
    "decode": "code decode",
    "kraft_sum": "code kraft",
    "overflow": "overflow",
    "first_order_threshold": "threshold first",
    "second_order_threshold": "threshold second",
    "vl_to_fl": "equiv vl2fl",
    "fl_to_vl": "equiv fl2vl",
    "lemma_bounds": "lemma-bounds",
}

SUBCOMMANDS = sorted(set(COMMAND_TABLE.values()))

_CONFIG_ERRORS = (
    cost_model.CostModelError,
    sources.SourceError,
    spectrum.SpectrumError,
    codec.CodecError,
    analysis.AnalysisError,
    OSError,
    json.JSONDecodeError,
)


class _CliError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # machine-readable config errors, exit code 2
        raise _CliError(message)


def _parse_symbols(text: str) -> tuple[int, ...]:
    text = text.strip()
    if "," in text:
        return tuple(int(t) for t in text.split(","))
    return tuple(int(ch) for ch in text)


def _format_symbols(symbols) -> str:
    if all(0 <= s <= 9 for s in symbols):
        return "".join(str(s) for s in symbols)
    return ",".join(str(s) for s in symbols)


def _parse_grid(text: str) -> tuple[float, ...]:
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise _CliError("grid range must be start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise _CliError("grid step must be positive")
        out = []
        k = 0
        while (v := start + k * step) <= stop + 1e-12:
            out.append(v)
            k += 1
        return tuple(out)
    return tuple(float(t) for t in text.split(","))


def _write(text: str, path: str | None) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(doc: dict, path: str | None) -> None:
    _write(json.dumps(doc, indent=2, sort_keys=True) + "\n", path)


def _log_scale(k: int, log_base: float | None) -> float:
    if log_base is None:
        return 1.0
    if log_base <= 0 or log_base == 1.0:
        raise _CliError("--log-base must be positive and != 1")
    return math.log(k) / math.log(log_base)


def _load_pair(args):
    src = sources.load_source(args.source)
    model = cost_model.load_cost_model(args.costs)
    return src, model


def _built_code(args):
    src, model = _load_pair(args)
    dist = sources.enumerate_support(src, args.n)
    return src, model, codec.build_exact_code(dist, model, bits=args.bits)


def _code_csv(code: codec.PrefixCode) -> str:
    buf = io.StringIO()
    buf.write("sequence,codeword,cost\n")
    for x, _ in code.dist.entries:
        w = code.table[x]
        buf.write(f"{_format_symbols(x)},{_format_symbols(w)},{code.model.cost_of(w)!r}\n")
    return buf.getvalue()


def _overflow_csv(results) -> str:
    buf = io.StringIO()
    buf.write("eta,probability,stderr,method\n")
    for r in results:
        se = "" if r.stderr is None else repr(r.stderr)
        buf.write(f"{r.eta!r},{r.probability!r},{se},{r.method}\n")
    return buf.getvalue()


def _lemma_csv(rows) -> str:
    buf = io.StringIO()
    buf.write("eta,z,lower_raw,lower,upper_raw,upper,method\n")
    for b in rows:
        buf.write(
            f"{b.eta!r},{b.z!r},{b.lower_raw!r},{b.lower!r},{b.upper_raw!r},{b.upper!r},{b.method}\n"
        )
    return buf.getvalue()


def _cmd_capacity(args) -> int:
    model = cost_model.load_cost_model(args.costs)
    if model.conditional is not None:
        cap = cost_model.validate_conditional_model(model)
    else:
        cap = cost_model.solve_cost_capacity(model)
    scale = _log_scale(model.K, args.log_base)
    doc = {
        "K": model.K,
        "alpha_c": cap.alpha_c * scale,
        "residual": cap.residual,
        "bracket": list(cap.bracket),
        "symbol_measure": cost_model.symbol_measure(model, cap),
        "c_max": model.c_max,
        "conditional_rows": sorted(model.conditional) if model.conditional else None,
        "log_base": args.log_base or model.K,
    }
    _emit_json(doc, args.output)
    return 0


def _cmd_code(args) -> int:
    src, model, code = _built_code(args)
    if args.code_cmd == "build":
        _write(_code_csv(code), args.output)
        return 0
    if args.code_cmd == "encode":
        word = code.encode(_parse_symbols(args.sequence))
        _emit_json(
            {"sequence": args.sequence, "codeword": _format_symbols(word),
             "cost": model.cost_of(word)},
            args.output,
        )
        return 0
    if args.code_cmd == "decode":
        seq = code.decode(_parse_symbols(args.codeword))
        _emit_json({"codeword": args.codeword, "sequence": _format_symbols(seq)}, args.output)
        return 0
    _emit_json({"kraft_sum": codec.kraft_sum(code), "alpha_c": code.capacity.alpha_c}, args.output)
    return 0


def _overflow_queries(args):
    if args.eta:
        return [codec.OverflowQuery(n=args.n, family="raw", eta=e, method=args.method,
                                    samples=args.samples, seed=args.seed) for e in args.eta]
    if args.R is not None:
        return [codec.OverflowQuery(n=args.n, family="first-order", R=args.R, method=args.method,
                                    samples=args.samples, seed=args.seed)]
    if args.a is not None and args.L is not None:
        return [codec.OverflowQuery(n=args.n, family="second-order", a=args.a, L=args.L,
                                    method=args.method, samples=args.samples, seed=args.seed)]
    raise _CliError("overflow needs --eta values, or --R, or --a with --L")


def _cmd_overflow(args) -> int:
    src, model = _load_pair(args)
    queries = _overflow_queries(args)
    if args.method == "surrogate-mc":
        results = [codec.overflow(q, source=src, model=model) for q in queries]
    else:
        dist = sources.enumerate_support(src, args.n)
        code = codec.build_exact_code(dist, model, bits=args.bits)
        results = [codec.overflow(q, code=code) for q in queries]
    _write(_overflow_csv(results), args.output)
    if args.plot:
        figures.save_overflow_figure(results, args.plot)
    return 0


def _cmd_spectrum(args) -> int:
    src, model = _load_pair(args)
    cap = cost_model.solve_cost_capacity(model)
    query = spectrum.SpectrumQuery(
        source=src,
        n=args.n,
        alpha_c=cap.alpha_c,
        grid=_parse_grid(args.grid),
        mode=args.mode,
        base=model.K,
        a=args.a,
        samples=args.samples,
        seed=args.seed,
        lattice_step=args.lattice_step,
    )
    if args.spectrum_kind == "first":
        curve = spectrum.first_order_spectrum(query)
    else:
        if args.a is None:
            raise _CliError("spectrum second needs --a (the first-order center)")
        curve = spectrum.second_order_spectrum(query)
    _write(curve.to_csv(), args.output)
    if args.plot:
        figures.save_spectrum_figure(curve, args.plot,
                                     title=f"{args.spectrum_kind}-order spectrum, n={args.n}")
    return 0


def _threshold_doc(result: analysis.ThresholdResult, k: int, log_base) -> dict:
    scale = _log_scale(k, log_base)
    doc = result.to_dict()
    inputs = doc["inputs"]
    for key in ("H", "H1", "H2", "sigma", "sigma1", "sigma2"):
        if key in inputs:
            inputs[key] = inputs[key] * scale
    doc["log_base"] = log_base or k
    return doc


def _cmd_threshold(args) -> int:
    src, model = _load_pair(args)
    if args.threshold_kind == "first":
        result = analysis.first_order_threshold(src, model, args.eps)
    else:
        result = analysis.second_order_threshold(src, model, args.eps, a=args.a)
    _emit_json(_threshold_doc(result, model.K, args.log_base), args.output)
    return 0


def _cmd_equiv(args) -> int:
    src, model, code = _built_code(args)
    if args.equiv_kind == "vl2fl":
        fl = analysis.vl_to_fl(code, args.eta)
        exact = codec.overflow(
            codec.OverflowQuery(n=args.n, family="raw", eta=args.eta), code=code
        ).probability
        scale = _log_scale(model.K, args.log_base)
        log_size = (math.log(fl.size, model.K) * scale) if fl.size else None
        doc = {
            "eta": args.eta,
            "size": fl.size,
            "log_size": log_size,
            "capacity_bound": code.capacity.alpha_c * args.eta * scale,
            "error_probability": fl.error_probability,
            "exact_overflow": exact,
            "log_base": args.log_base or model.K,
        }
        _emit_json(doc, args.output)
        if args.members_output:
            rows = "sequence\n" + "".join(_format_symbols(x) + "\n" for x in fl.members)
            _write(rows, args.members_output)
        return 0
    # fl2vl: member set = the M most probable sequences (ties lexicographic)
    dist = code.dist
    ranked = sorted(dist.entries, key=lambda e: (-e[1], e[0]))
    m = args.size
    if not 1 <= m <= len(ranked):
        raise _CliError(f"--size must lie in 1..{len(ranked)}")
    members = tuple(sorted(x for x, _ in ranked[:m]))
    error = math.fsum(p for x, p in dist.entries if x not in set(members))
    fl = analysis.FixedLengthCode(n=args.n, size=m, members=members, error_probability=error)
    combined, cert = analysis.fl_to_vl(fl, dist, model)
    ov = codec.overflow(
        codec.OverflowQuery(n=args.n, family="raw", eta=cert.threshold), code=combined
    ).probability
    doc = {
        "size": m,
        "certificate_threshold": cert.threshold,
        "flag_cost": cert.flag_cost,
        "max_member_cost": cert.max_member_cost,
        "error_bound": cert.error_bound,
        "overflow_at_threshold": ov,
    }
    _emit_json(doc, args.output)
    if args.table_output:
        _write(_code_csv(combined), args.table_output)
    return 0


def _cmd_lemma(args) -> int:
    src, model = _load_pair(args)
    rows = [
        analysis.lemma_bounds(src, model, args.n, eta, z, method=args.method,
                              samples=args.samples, seed=args.seed)
        for eta in args.eta
        for z in args.z
    ]
    _write(_lemma_csv(rows), args.output)
    if args.plot:
        overflow_points = None
        if args.method == "exact":
            dist = sources.enumerate_support(src, args.n)
            code = codec.build_exact_code(dist, model)
            overflow_points = [
                (eta, codec.overflow(codec.OverflowQuery(n=args.n, family="raw", eta=eta),
                                     code=code).probability)
                for eta in args.eta
            ]
        figures.save_lemma_figure(rows, overflow_points, args.plot)
    return 0


def _cmd_diagnose(args) -> int:
    src, model = _load_pair(args)
    n_list = [int(v) for v in args.n_list.split(",")]
    report = spectrum.strong_converse_diagnostic(
        src, n_list, args.delta, base=model.K, samples=args.samples, seed=args.seed
    )
    _emit_json(report.to_dict(), args.output)
    if args.csv_output:
        _write(report.to_csv(), args.csv_output)
    if args.plot:
        figures.save_diagnostic_figure(report, args.plot)
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="costcode", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, *, needs_source=True, needs_n=False):
        p.add_argument("--costs", required=True, help="cost model JSON file")
        if needs_source:
            p.add_argument("--source", required=True, help="source definition JSON file")
        if needs_n:
            p.add_argument("--n", type=int, required=True, help="block length")
        p.add_argument("--output", help="output file (default stdout)")

    p = sub.add_parser("capacity", help="cost capacity and symbol measure")
    add_common(p, needs_source=False)
    p.add_argument("--log-base", type=float, default=None)

    p = sub.add_parser("code", help="build or use the interval prefix code")
    code_sub = p.add_subparsers(dest="code_cmd", required=True)
    for name in ("build", "encode", "decode", "kraft"):
        cp = code_sub.add_parser(name)
        add_common(cp, needs_n=True)
        cp.add_argument("--bits", type=int, default=None, help="fixed-point precision bits")
        if name == "encode":
            cp.add_argument("--sequence", required=True, help="source symbols, e.g. 0101 or 0,1,0,1")
        if name == "decode":
            cp.add_argument("--codeword", required=True, help="code symbols, e.g. 0110")

    p = sub.add_parser("overflow", help="overflow probability of the built code")
    add_common(p, needs_n=True)
    p.add_argument("--eta", type=float, action="append", help="raw cost threshold (repeatable)")
    p.add_argument("--R", type=float, default=None, help="first-order rate (eta = n R)")
    p.add_argument("--a", type=float, default=None, help="second-order center")
    p.add_argument("--L", type=float, default=None, help="second-order deviation")
    p.add_argument("--method", choices=("exact", "mc", "surrogate-mc"), default="exact")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bits", type=int, default=None)
    p.add_argument("--plot", help="render the overflow figure to this file")

    p = sub.add_parser("spectrum", help="information-spectrum tail curves")
    kind_sub = p.add_subparsers(dest="spectrum_kind", required=True)
    for kind in ("first", "second"):
        sp = kind_sub.add_parser(kind)
        add_common(sp, needs_n=True)
        sp.add_argument("--grid", required=True, help="thresholds: start:stop:step or v1,v2,...")
        sp.add_argument("--mode", choices=("exact", "dp", "monte-carlo"), default="exact")
        sp.add_argument("--a", type=float, default=None, help="first-order center (second only)")
        sp.add_argument("--samples", type=int, default=100_000)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--lattice-step", type=float, default=spectrum.DEFAULT_LATTICE_STEP)
        sp.add_argument("--plot", help="render the curve to this file")

    p = sub.add_parser("threshold", help="first/second-order overflow thresholds")
    thr_sub = p.add_subparsers(dest="threshold_kind", required=True)
    for kind in ("first", "second"):
        tp = thr_sub.add_parser(kind)
        add_common(tp)
        tp.add_argument("--eps", type=float, required=True, help="target overflow level")
        tp.add_argument("--log-base", type=float, default=None)
        if kind == "second":
            tp.add_argument("--a", type=float, default=None, help="first-order center (default: admissible)")

    p = sub.add_parser("equiv", help="variable-length/fixed-length code transformations")
    eq_sub = p.add_subparsers(dest="equiv_kind", required=True)
    ep = eq_sub.add_parser("vl2fl")
    add_common(ep, needs_n=True)
    ep.add_argument("--eta", type=float, required=True)
    ep.add_argument("--bits", type=int, default=None)
    ep.add_argument("--log-base", type=float, default=None)
    ep.add_argument("--members-output", help="CSV of the member sequences")
    ep = eq_sub.add_parser("fl2vl")
    add_common(ep, needs_n=True)
    ep.add_argument("--size", type=int, required=True, help="fixed-length code size M")
    ep.add_argument("--bits", type=int, default=None)
    ep.add_argument("--table-output", help="CSV of the combined code table")

    p = sub.add_parser("lemma-bounds", help="spectrum lower/upper overflow bounds")
    add_common(p, needs_n=True)
    p.add_argument("--eta", type=float, action="append", required=True)
    p.add_argument("--z", type=float, action="append", required=True)
    p.add_argument("--method", choices=("exact", "mc"), default="exact")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--plot", help="render the sandwich figure to this file")

    p = sub.add_parser("diagnose", help="strong-converse diagnostics")
    diag_sub = p.add_subparsers(dest="diagnose_kind", required=True)
    dp = diag_sub.add_parser("strong-converse")
    add_common(dp)
    dp.add_argument("--n-list", required=True, help="comma-separated block lengths")
    dp.add_argument("--delta", type=float, default=0.05)
    dp.add_argument("--samples", type=int, default=100_000)
    dp.add_argument("--seed", type=int, default=0)
    dp.add_argument("--csv-output", help="also write the per-n quantile rows as CSV")
    dp.add_argument("--plot", help="render the gap figure to this file")

    return parser


_DISPATCH = {
    "capacity": _cmd_capacity,
    "code": _cmd_code,
    "overflow": _cmd_overflow,
    "spectrum": _cmd_spectrum,
    "threshold": _cmd_threshold,
    "equiv": _cmd_equiv,
    "lemma-bounds": _cmd_lemma,
    "diagnose": _cmd_diagnose,
}


def _error_json(exc: BaseException, exit_code: int) -> int:
    doc = {"error": type(exc).__name__, "message": str(exc), "exit_code": exit_code}
    sys.stderr.write(json.dumps(doc) + "\n")
    return exit_code


def run(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _DISPATCH[args.command](args)
    except (_CliError, *_CONFIG_ERRORS) as exc:
        return _error_json(exc, 2)
    except (codec.PrecisionExhausted, ArithmeticError) as exc:
        return _error_json(exc, 3)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
