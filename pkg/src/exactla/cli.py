"""``exactla`` command line: multiply, apply, convert, bench, tune, regress.

Exit codes: 0 success, 1 parse/input error, 2 dimension mismatch,
3 regression failure (or incomparable baseline), 4 degenerate tuning data.
Diagnostics go to standard error; ``-o -`` writes results to standard output.
"""

from __future__ import annotations

import argparse
import datetime
import platform
import sys

import numpy as np

from .bench import config as _config
from .bench.plot import OutputKind, PlotData, PlotStyle, plot_emit, read_csv
from .bench.regression import RegressionBaseline, Status, regression_check
from .bench.timing import time_op
from .bench.tuning import TuningError, tune_threshold
from .containers import (
    DenseMatrix,
    DimensionError,
    MatrixMarketError,
    SparseCOO,
    convert,
    mm_dumps,
    mm_read,
)
from .containers.dense import _DenseBase
from .field_arith import ZZ, PrimeField, primes_below
from .matmul import Method, MulHelper, MulProblem, mul, mul_controller
from .sparse_apply import optimize_plan

EXIT_OK, EXIT_PARSE, EXIT_DIM, EXIT_REGRESS, EXIT_TUNE = 0, 1, 2, 3, 4


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_PARSE):
        super().__init__(message)
        self.code = code


def parse_field_spec(text: str):
    """``zp:<p>`` or ``int``."""
    if text == "int":
        return ZZ
    kind, _, p = text.partition(":")
    if kind != "zp" or not p:
        raise CliError(f"bad field spec {text!r} (expected zp:<p> or int)")
    try:
        return PrimeField(int(p))
    except ValueError as exc:
        raise CliError(f"bad field spec {text!r}: {exc}") from None


def parse_sizes(text: str) -> list:
    """``lo:hi:*k`` (geometric), ``lo:hi:+k`` (additive) or ``a,b,c``."""
    try:
        if ":" not in text:
            sizes = [int(t) for t in text.split(",")]
        else:
            lo, hi, step = text.split(":")
            lo, hi = int(lo), int(hi)
            op, k = step[0], int(step[1:])
            if op not in "*+" or (op == "*" and k < 2) or (op == "+" and k < 1):
                raise ValueError
            sizes = []
            n = lo
            while n <= hi:
                sizes.append(n)
                n = n * k if op == "*" else n + k
    except (ValueError, IndexError):
        raise CliError(f"bad size grid {text!r} (expected lo:hi:*k, lo:hi:+k or a,b,c)") from None
    if not sizes or any(n < 1 for n in sizes):
        raise CliError(f"size grid {text!r} is empty or has nonpositive sizes")
    return sizes


def _write(text: str, dest: str) -> None:
    if dest == "-":
        sys.stdout.write(text)
    else:
        with open(dest, "w", newline="\n") as fh:
            fh.write(text)


def _dense_array(A):
    return A.array if isinstance(A, _DenseBase) else A.to_dense()


def _helper(args, alpha=1, beta=0) -> MulHelper:
    return MulHelper(Method.parse(args.method), args.threshold, alpha, beta)


def cmd_mul(args) -> int:
    F = parse_field_spec(args.field) if args.field else None
    A = mm_read(args.A, field=F)
    B = mm_read(args.B, field=F if F is not None else A.field)
    F = A.field
    m, k = A.shape
    if B.shape[0] != k:
        raise DimensionError(f"inner dimensions differ: {A.shape} x {B.shape}")
    n = B.shape[1]
    C0 = mm_read(args.C, field=F) if args.C else None
    if C0 is not None and C0.shape != (m, n):
        raise DimensionError(f"C is {C0.shape}, expected {(m, n)}")
    if F.is_integer_ring:
        D = mul(F, _dense_array(A), _dense_array(B), _helper(args))
        out = args.alpha * D
        if C0 is not None and args.beta:
            out = out + args.beta * _dense_array(C0)
        R = DenseMatrix(F, m, n, out)
    else:
        C = np.zeros((m, n), dtype=np.int64) if C0 is None else np.array(_dense_array(C0), dtype=np.int64)
        mul_controller(MulProblem(C, _dense_array(A), _dense_array(B), F),
                       _helper(args, args.alpha, args.beta))
        R = DenseMatrix(F, m, n, C)
        if not isinstance(B, _DenseBase):
            R = convert(R, "coo")
    _write(mm_dumps(R), args.output)
    return EXIT_OK


def cmd_spmv(args) -> int:
    A = mm_read(args.A)
    if A.field.is_integer_ring:
        raise CliError("sparse apply needs a prime field")
    x = mm_read(args.x, field=A.field, dense=True)
    fmt = None if args.format == "auto" else args.format
    plan = optimize_plan(A, format=fmt)
    X = x.array
    if X.shape[1] == 1:
        X = X[:, 0]
    y = plan.apply(None, X, side=args.side)
    y = y.reshape(y.shape[0], -1)
    _write(mm_dumps(DenseMatrix(A.field, y.shape[0], y.shape[1], y)), args.output)
    return EXIT_OK


def cmd_convert(args) -> int:
    if len(args.paths) > 2:
        raise CliError("convert takes an input path and at most one output path")
    src, dest = (args.paths + ["-"])[:2]
    A = mm_read(src)
    if A.field.is_integer_ring and args.to != "dense":
        raise CliError("integer matrices can only be stored dense")
    B = A if A.field.is_integer_ring else convert(A, args.to)
    _write(mm_dumps(B), dest)
    return EXIT_OK


def _metadata(op: str, F, machine: str | None, timestamp: str | None) -> dict:
    return {
        "op": op,
        "field": F.name,
        "machine": machine or platform.node() or "unknown",
        "timestamp": timestamp or datetime.datetime.now().isoformat(timespec="seconds"),
    }


def _random_sparse(F, n: int, density: float, rng) -> SparseCOO:
    nnz = max(1, int(round(density * n * n)))
    flat = rng.choice(n * n, size=nnz, replace=False)
    vals = rng.integers(1, F.p, size=nnz)
    return SparseCOO(F, n, n, flat // n, flat % n, vals)


def run_bench(op: str, F, sizes, series, reps: int, rng, threshold=None, density=0.05) -> dict:
    out = {}
    for name in series:
        pts = []
        for n in sizes:
            if op == "mul":
                A = rng.integers(0, F.p, size=(n, n))
                B = rng.integers(0, F.p, size=(n, n))
                if name == "recursive":
                    # one forced level, base products below it
                    H = MulHelper(Method.WINOGRAD, n)
                else:
                    H = MulHelper(Method.parse(name), threshold)
                stats = time_op(lambda: mul(F, A, B, H), reps, warmup=1)
            else:
                S = _random_sparse(F, n, density, rng)
                plan = optimize_plan(S, format=name)
                x = rng.integers(0, F.p, size=n)
                stats = time_op(lambda: plan.apply(None, x), reps, warmup=1)
            pts.append((n, list(stats.samples)))
        out[name] = pts
    return out


def cmd_bench(args) -> int:
    F = parse_field_spec(args.field)
    if F.is_integer_ring:
        raise CliError("benchmarks run over a prime field")
    sizes = parse_sizes(args.sizes)
    default = "base,auto" if args.op == "mul" else "csr,coo,hyb"
    series = [s.strip() for s in (args.series or default).split(",") if s.strip()]
    rng = np.random.default_rng(args.seed)
    data = PlotData(metadata=_metadata(args.op, F, args.machine, args.timestamp))
    for name, pts in run_bench(args.op, F, sizes, series, args.reps, rng, args.threshold).items():
        for n, samples in pts:
            data.add(name, n, samples)
    if args.gnuplot:
        csv_path = args.csv or args.gnuplot.rsplit(".", 1)[0] + ".csv"
        style = PlotStyle(OutputKind.GNUPLOT, logx=True, logy=True, title=f"{args.op} over {F.name}")
        written = plot_emit(data, style, csv_path, args.gnuplot)
    elif args.csv:
        written = plot_emit(data, PlotStyle(), args.csv)
    else:
        from .bench.plot import dumps_csv

        sys.stdout.write(dumps_csv(data))
        written = []
    for path in written:
        print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK


def cmd_tune(args) -> int:
    if args.op != "mul":
        raise CliError(f"tuning is available for mul only, not {args.op!r}")
    F = parse_field_spec(args.field)
    if F.is_integer_ring:
        raise CliError("tuning runs over a prime field")
    sizes = parse_sizes(args.sizes)
    rng = np.random.default_rng(args.seed)
    timings = run_bench("mul", F, sizes, ["base", "recursive"], args.reps, rng)
    res = tune_threshold(timings["base"], timings["recursive"])
    values = {"mul.threshold": res.threshold, "mul.methods.dense": res.method_table.dumps()}
    path = _config.write_config(values, args.out)
    for name, fit in res.fits.items():
        worst = max(abs(r) for r in fit.residuals)
        print(f"{name}: coeffs={fit.coeffs} max relative residual={worst:.3g}", file=sys.stderr)
    print(f"mul.threshold = {res.threshold} written to {path}")
    return EXIT_OK


def cmd_regress(args) -> int:
    baseline = RegressionBaseline.load(args.baseline)
    current = read_csv(args.current)
    try:
        report = regression_check(current, baseline, args.tol)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_REGRESS) from None
    print(report.format())
    return EXIT_OK if report.status is Status.PASS else EXIT_REGRESS


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="exactla", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def method_flags(p):
        p.add_argument("--method", default="auto", choices=["auto", "base", "winograd"])
        p.add_argument("--threshold", type=int, default=None,
                       help="recursion threshold (default: tuned config, then 64)")

    p = sub.add_parser("mul", help="C = alpha*A*B + beta*C")
    p.add_argument("A")
    p.add_argument("B")
    p.add_argument("--field", help="zp:<p> or int (default: the files' field)")
    method_flags(p)
    p.add_argument("--alpha", type=int, default=1)
    p.add_argument("--beta", type=int, default=0)
    p.add_argument("--C", help="initial C for the beta term (default zero)")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_mul)

    p = sub.add_parser("spmv", help="y = A*x (right) or A^T*x (left)")
    p.add_argument("A")
    p.add_argument("x")
    p.add_argument("--format", default="auto", choices=["auto", "coo", "csr", "hyb"])
    p.add_argument("--side", default="right", choices=["left", "right"])
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_spmv)

    p = sub.add_parser("convert", help="re-store a matrix in another format")
    p.add_argument("paths", nargs="+", metavar="PATH", help="input, then output (default -)")
    p.add_argument("--to", required=True, choices=["coo", "csr", "dense"])
    p.set_defaults(func=cmd_convert)

    def bench_flags(p, sizes_default):
        p.add_argument("--sizes", default=sizes_default)
        p.add_argument("--reps", type=int, default=3)
        p.add_argument("--field", default=f"zp:{next(primes_below(26))}")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("bench", help="time operations over a size grid")
    p.add_argument("--op", default="mul", choices=["mul", "spmv"])
    bench_flags(p, "64:512:*2")
    p.add_argument("--series", help="comma-separated methods (mul) or formats (spmv)")
    p.add_argument("--threshold", type=int, default=None)
    p.add_argument("--csv")
    p.add_argument("--gnuplot")
    p.add_argument("--machine")
    p.add_argument("--timestamp")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("tune", help="find the recursion threshold and save it")
    p.add_argument("--op", default="mul")
    bench_flags(p, "32:512:*2")
    p.add_argument("--out", default=None, help="config path (default: $XLA_CONFIG or ./xla.conf)")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("regress", help="compare timings against a baseline")
    p.add_argument("--baseline", required=True)
    p.add_argument("--current", required=True)
    p.add_argument("--tol", type=float, default=0.2)
    p.set_defaults(func=cmd_regress)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args, extra = parser.parse_known_args(argv)
        # positionals after an option (``convert in --to csr out``)
        if extra and args.command == "convert" and not any(e.startswith("-") and e != "-" for e in extra):
            args.paths += extra
        elif extra:
            parser.error(f"unrecognized arguments: {' '.join(extra)}")
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_PARSE
    _config.set_tuned_config(None)
    try:
        return args.func(args)
    except DimensionError as exc:
        print(f"exactla: dimension mismatch: {exc}", file=sys.stderr)
        return EXIT_DIM
    except TuningError as exc:
        print(f"exactla: {exc}", file=sys.stderr)
        return EXIT_TUNE
    except CliError as exc:
        print(f"exactla: {exc}", file=sys.stderr)
        return exc.code
    except (MatrixMarketError, ValueError, OSError) as exc:
        print(f"exactla: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
