"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 data or runtime error.  Results go to
stdout, diagnostics to stderr.  Commands that write files also write
``<output>.manifest.json`` with everything needed to repeat the run.
"""
from __future__ import annotations

import argparse
import json
import sys
from decimal import Decimal
from pathlib import Path

import numpy as np

from kernlin import __version__
from kernlin._backend import core
from kernlin.data import NormMode, parse_svmlight
from kernlin.estimate import convergence_study
from kernlin.kernels import KernelKind, KernelSpec, export_precomputed, kernel_matrix
from kernlin.sketch import Method, SketchPlan, default_threads, featurize_dataset, read_encoded
from kernlin.trainer import (DEFAULT_C_GRID, SvmModel, TrainConfig, accuracy, c_sweep, predict,
                             train_multiclass)

GAMMA_GRID = "0.001, 0.01, 0.1:0.1:2, 2.5, 3:1:20, 25:5:50, 60:10:100, 120, 150, 200, 300, 500, 1000"
DEFAULT_KGRID = "128,256,512,1024,4096"
DEFAULT_BITS = 8


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def expand_grid(text: str) -> list[float]:
    """Expand ``a, b:step:c, ...`` with inclusive MATLAB-style ranges."""
    values: list[float] = []
    for item in text.replace(" ", "").split(","):
        if not item:
            continue
        parts = [Decimal(p) for p in item.split(":")]
        if len(parts) == 1:
            values.append(float(parts[0]))
        elif len(parts) == 3:
            start, step, stop = parts
            x = start
            while x <= stop:
                values.append(float(x))
                x += step
        else:
            raise ValueError(f"bad grid item {item!r}")
    return values


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None


def _write(path: str, text: str):
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc.strerror}") from None


def _manifest(path: str, command: str, args: argparse.Namespace, **extra):
    params = {k: v for k, v in vars(args).items() if k != "func"}
    doc = {"command": command, "params": params, "version": __version__,
           "backend": core.NAME, **extra}
    _write(path + ".manifest.json", json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n")


def _load_dataset(path: str, dim: int | None):
    try:
        return parse_svmlight(_read(path), dim=dim)
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from None


def _plan_from_args(args) -> SketchPlan:
    method = Method.parse(args.method)
    if method.uses_gamma and args.gamma is None:
        raise UsageError(f"--gamma is required for method {method.value}")
    if not method.uses_gamma and args.gamma is not None:
        raise UsageError(f"--gamma does not apply to method {method.value}")
    b = args.b
    if method.uses_bits:
        b = DEFAULT_BITS if b is None else b
    elif b is not None:
        raise UsageError(f"--b does not apply to method {method.value}")
    try:
        return SketchPlan(method, args.k, b, args.gamma, args.seed, args.normalize)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _kernel_from_args(name: str, gamma: float | None) -> KernelSpec:
    kind = KernelKind.parse(name)
    if kind.needs_gamma and gamma is None:
        raise UsageError(f"--gamma is required for kernel {kind.value}")
    return KernelSpec(kind, gamma if kind.needs_gamma else None)


def cmd_featurize(args) -> int:
    plan = _plan_from_args(args)
    data = _load_dataset(args.inp, args.dim)
    try:
        encoded = featurize_dataset(data, plan, threads=args.threads)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    _write(args.out, encoded.to_svmlight())
    _manifest(args.out, "featurize", args, plan=plan.header())
    nnz = sorted({r.nnz for r in encoded.rows})
    print(f"rows={len(encoded)} dim={encoded.total_dim} nnz_per_row={','.join(map(str, nnz))}")
    return 0


def cmd_kernel_matrix(args) -> int:
    spec = _kernel_from_args(args.kernel, args.gamma)
    train = _load_dataset(args.train, args.dim)
    test = _load_dataset(args.test, train.dim if args.dim is None else args.dim) if args.test else None
    if test is not None and test.dim != train.dim:
        dim = max(train.dim, test.dim)
        train, test = train.with_dim(dim), test.with_dim(dim)
    norm = NormMode.parse(args.normalize)
    try:
        train = train.normalized(norm)
        km = kernel_matrix(train, None, spec)
        _write(args.out, export_precomputed(km))
        shapes = [f"train={km.shape[0]}x{km.shape[1]}"]
        if test is not None:
            test = test.normalized(norm)
            test_out = args.test_out or args.out + ".test"
            tm = kernel_matrix(test, train, spec)
            _write(test_out, export_precomputed(tm))
            shapes.append(f"test={tm.shape[0]}x{tm.shape[1]}")
    except ValueError as exc:
        raise DataError(str(exc)) from None
    _manifest(args.out, "kernel-matrix", args, kernel=str(spec))
    print(f"kernel={spec} " + " ".join(shapes))
    return 0


def _parse_int_list(text: str, flag: str) -> list[int]:
    try:
        values = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"{flag} expects comma-separated integers") from None
    if not values or any(v < 1 for v in values):
        raise UsageError(f"{flag} expects positive integers")
    return values


def cmd_converge(args) -> int:
    args.k = 1
    plan = _plan_from_args(args)
    kernel = args.kernel or plan.method.target.value
    spec = _kernel_from_args(kernel, args.gamma)
    kgrid = _parse_int_list(args.kgrid, "--kgrid")
    if any(b <= a for a, b in zip(kgrid, kgrid[1:])):
        raise UsageError("--kgrid must be strictly increasing")
    if args.reps < 1 or args.pairs < 1:
        raise UsageError("--reps and --pairs must be positive")
    data = _load_dataset(args.inp, args.dim)
    n = len(data)
    if n < 2:
        raise DataError(f"{args.inp}: need at least two rows to form pairs")
    rng = np.random.default_rng(args.seed)
    pairs = []
    for _ in range(args.pairs):
        a, b = rng.choice(n, size=2, replace=False)
        pairs.append((data.rows[a], data.rows[b]))
    try:
        report = convergence_study(pairs, spec, plan, kgrid, args.reps, args.seed)
    except (ValueError, ArithmeticError) as exc:
        raise DataError(str(exc)) from None
    text = report.to_csv()
    _write(args.out, text)
    _manifest(args.out, "converge", args, plan=plan.header(), kernel=str(spec))
    sys.stdout.write(text)
    return 0


def _load_encoded(path: str, dim: int | None = None):
    try:
        return read_encoded(_read(path), dim=dim)
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from None


def cmd_train(args) -> int:
    if (args.c is None) == (args.csweep is None):
        raise UsageError("give exactly one of --c or --csweep")
    train = _load_encoded(args.inp)
    cfg = TrainConfig(1.0, args.max_iter, args.tol, args.seed)
    try:
        if args.c is not None:
            if not args.c > 0:
                raise UsageError("--c must be positive")
            C = args.c
        else:
            grid = expand_grid(args.csweep) if args.csweep != "default" else list(DEFAULT_C_GRID)
            if not grid or any(c <= 0 for c in grid):
                raise UsageError("--csweep expects positive values")
            if args.test:
                test = _load_encoded(args.test, dim=train.total_dim)
            else:
                print("no --test given; scoring the C sweep on the training rows", file=sys.stderr)
                test = train
            sweep = c_sweep(train, train.labels, test, test.labels, grid, cfg)
            print("C\taccuracy")
            for c, acc in sweep.table:
                print(f"{c:g}\t{acc:.4f}")
            print(f"best C={sweep.best_C:g} accuracy={sweep.best_accuracy:.4f}")
            C = sweep.best_C
        model = train_multiclass(train, train.labels, cfg.with_C(C))
    except ValueError as exc:
        raise DataError(str(exc)) from None
    _write(args.model, model.to_text())
    _manifest(args.model, "train", args, C=C)
    print(f"model={args.model} classes={','.join(map(str, model.class_ids))} dim={model.dim} C={C:g}")
    return 0


def cmd_predict(args) -> int:
    try:
        model = SvmModel.from_text(_read(args.model))
    except ValueError as exc:
        raise DataError(f"{args.model}: {exc}") from None
    data = _load_encoded(args.inp, dim=model.dim)
    try:
        pred = predict(model, data)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    if args.labels_out:
        _write(args.labels_out, "".join(f"{p}\n" for p in pred))
    print(f"accuracy={accuracy(pred, data.labels):.6f} n={len(pred)}")
    return 0


def cmd_gamma_grid(args) -> int:
    for g in expand_grid(GAMMA_GRID):
        print(f"{g:g}")
    return 0


def _add_plan_flags(p, k_required=True):
    p.add_argument("--method", required=True, help=", ".join(m.value for m in Method))
    if k_required:
        p.add_argument("--k", type=int, required=True, help="number of samples")
    p.add_argument("--b", type=int, help=f"bucket bits for CWS-based methods (default {DEFAULT_BITS})")
    p.add_argument("--gamma", type=float, help="RBF parameter (rff, frff, mm-rbf)")
    p.add_argument("--seed", type=int, default=1, help="master seed (u64)")
    p.add_argument("--normalize", default="none", choices=["l1", "l2", "none"])
    p.add_argument("--dim", type=int, help="override the input dimension")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kernlin", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"kernlin {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("featurize", help="linearize a dataset with a random feature map")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    _add_plan_flags(p)
    p.add_argument("--threads", type=int, default=default_threads(),
                   help="worker threads (env KERNLIN_THREADS); output does not depend on it")
    p.set_defaults(func=cmd_featurize)

    p = sub.add_parser("kernel-matrix", help="export an exact precomputed kernel matrix")
    p.add_argument("--train", required=True)
    p.add_argument("--test")
    p.add_argument("--test-out", help="default: <out>.test")
    p.add_argument("--kernel", required=True, help=", ".join(k.value for k in KernelKind))
    p.add_argument("--gamma", type=float)
    p.add_argument("--normalize", default="none", choices=["l1", "l2", "none"])
    p.add_argument("--dim", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_kernel_matrix)

    p = sub.add_parser("converge", help="kernel-approximation error versus k")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--kernel", help="exact kernel (default: the method's target)")
    _add_plan_flags(p, k_required=False)
    p.add_argument("--kgrid", default=DEFAULT_KGRID)
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--pairs", type=int, default=20)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("train", help="train a one-vs-rest linear SVM")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--c", type=float)
    p.add_argument("--csweep", help="C values, e.g. '0.01,0.1,1,10' or 'default'")
    p.add_argument("--test", help="held-out file scoring the C sweep")
    p.add_argument("--model", required=True)
    p.add_argument("--seed", type=int, default=0, help="shuffle seed")
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--tol", type=float, default=1e-4)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="apply a trained model")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--labels-out")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("gamma-grid", help="print the 58-value gamma grid")
    p.set_defaults(func=cmd_gamma_grid)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"kernlin: error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"kernlin: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
