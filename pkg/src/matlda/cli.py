"""Command-line front end: ``matlda {simulate,fit,predict,bench}``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
Logs go to stderr; tabular output goes to files or stdout.
"""

import argparse
from concurrent.futures import ProcessPoolExecutor
import csv
import json
import logging
import sys
import warnings

import numpy as np

from .bcd import PenaltyConfig, fit
from .classifier import predict_batch, score_batch
from .fileio import DataFileError, fmt, load_model, read_dataset, save_model, save_truth, \
    write_dataset
from .linalg import LinAlgFailure
from .matnorm import EmptyClassError
from .metrics import misclassification_rate, support_metrics
from .simulation import BLOCK, N_CLASSES, SimulationSpec, generate_replicate
from .tuning import TuningGrid, grid_search, kfold_cv, parse_grid

log = logging.getLogger("matlda")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3
DEFAULT_GRID = "pow2:-12:0.5:12"

# solver settings that may come from --config; flags override them
SOLVER_KEYS = ("epsilon", "max_outer_iter", "glasso_tol", "glasso_max_iter", "ama_tol",
               "ama_max_iter", "mean_fuse_threshold")

DEFAULTS = {
    "simulate": {"n_train": 75, "n_validate": 75, "n_test": 1000, "pattern_file": None},
    "fit": {"lambda1": 0.0, "lambda2": 0.0, "validate": None, "cv": None, "grid": DEFAULT_GRID,
            "grid_lambda2": None, "seed": 0},
    "predict": {},
    "bench": {"grid": DEFAULT_GRID, "n_train": 75, "n_validate": 75, "n_test": 1000,
              "jobs": 1, "pattern_file": None},
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _dims(text):
    out = []
    for item in text.split(","):
        try:
            r, c = item.lower().split("x")
            out.append((int(r), int(c)))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad dimension {item!r}; expected RxC") from None
    return out


def build_parser():
    p = _Parser(prog="matlda", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="JSON file of option defaults (flags take precedence)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="draw train/validate/test data from a simulation model")
    s.add_argument("--model", type=int, choices=(1, 2, 3, 4), required=True)
    s.add_argument("--r", type=int, required=True)
    s.add_argument("--c", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out-prefix", required=True)
    s.add_argument("--pattern-file", help="48 numbers: three 4x4 class-mean blocks, row-major")
    s.add_argument("--n-train", type=int)
    s.add_argument("--n-validate", type=int)
    s.add_argument("--n-test", type=int)

    f = sub.add_parser("fit", help="fit at fixed penalties or tune them")
    f.add_argument("--train", required=True)
    f.add_argument("--lambda1", type=float)
    f.add_argument("--lambda2", type=float)
    g = f.add_mutually_exclusive_group()
    g.add_argument("--validate", help="tune on this validation set")
    g.add_argument("--cv", type=int, metavar="K", help="tune by K-fold cross-validation")
    f.add_argument("--grid", help=f"lambda grid, 'pow2:LO:STEP:HI' or 'a,b,c' "
                                  f"(default {DEFAULT_GRID})")
    f.add_argument("--grid-lambda2", help="separate grid for lambda2 (default: --grid)")
    f.add_argument("--seed", type=int, help="fold assignment seed for --cv")
    f.add_argument("--out", required=True)
    for k in SOLVER_KEYS:
        f.add_argument("--" + k.replace("_", "-"), type=float if "iter" not in k else int)

    pr = sub.add_parser("predict", help="classify a dataset with a fitted model")
    pr.add_argument("--model", required=True)
    pr.add_argument("--data", required=True)
    pr.add_argument("--out", required=True)

    b = sub.add_parser("bench", help="replication study of the tuned fit and the MLE")
    b.add_argument("--model", type=int, choices=(1, 2, 3, 4), required=True)
    b.add_argument("--dims", type=_dims, required=True, help="e.g. 8x8,16x16")
    b.add_argument("--reps", type=int, required=True)
    b.add_argument("--seed", type=int, required=True)
    b.add_argument("--out", required=True)
    b.add_argument("--grid")
    b.add_argument("--pattern-file")
    b.add_argument("--n-train", type=int)
    b.add_argument("--n-validate", type=int)
    b.add_argument("--n-test", type=int)
    b.add_argument("--jobs", type=int, help="worker processes (default 1)")
    return p


def _resolve(args, config):
    """Fill unset flags from the config file, then from built-in defaults."""
    merged = dict(DEFAULTS.get(args.command, {}))
    merged.update(config.get(args.command, {}))
    merged.update({k: v for k, v in config.items() if not isinstance(v, dict)})
    for key, val in merged.items():
        if getattr(args, key, None) is None:
            setattr(args, key, val)
    return args


def _load_config(path):
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DataFileError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(cfg, dict):
        raise DataFileError(f"{path}: config must be a JSON object")
    return cfg


def _pattern(path):
    if path is None:
        return None
    try:
        with open(path, encoding="utf-8") as fh:
            vals = [float(t) for t in fh.read().split()]
    except ValueError:
        raise DataFileError(f"{path}: pattern file must contain only numbers") from None
    if len(vals) != N_CLASSES * BLOCK * BLOCK:
        raise DataFileError(f"{path}: expected {N_CLASSES * BLOCK * BLOCK} values, "
                            f"got {len(vals)}")
    return np.array(vals).reshape(N_CLASSES, BLOCK, BLOCK)


def _sim_spec(args, model, r, c, seed):
    kw = dict(model=model, r=r, c=c, n_train=args.n_train, n_validate=args.n_validate,
              n_test=args.n_test, seed=seed)
    pat = _pattern(args.pattern_file)
    if pat is not None:
        kw["mean_pattern"] = pat
    try:
        return SimulationSpec(**kw)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_simulate(args):
    spec = _sim_spec(args, args.model, args.r, args.c, args.seed)
    rep = generate_replicate(spec)
    pre = args.out_prefix
    for name in ("train", "validate", "test"):
        write_dataset(f"{pre}_{name}.txt", getattr(rep, name))
    priors = np.full(N_CLASSES, 1.0 / N_CLASSES)
    if rep.true_params is not None:
        save_model(f"{pre}_truth.json", rep.true_params, fit_info={"model": spec.model})
    else:
        save_truth(f"{pre}_truth.json", priors, rep.means, rep.covariance.sigma)
    log.info("wrote %s_{train,validate,test}.txt and %s_truth.json", pre, pre)
    return EXIT_OK


def _penalty_config(args, lambda1, lambda2):
    kw = {k: getattr(args, k) for k in SOLVER_KEYS if getattr(args, k, None) is not None}
    return PenaltyConfig(lambda1=lambda1, lambda2=lambda2, **kw)


def _grid(args):
    try:
        g1 = parse_grid(args.grid)
        g2 = parse_grid(args.grid_lambda2) if getattr(args, "grid_lambda2", None) else g1
        return TuningGrid(g1, g2)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _write_tuning_table(path, errors):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("lambda1\tlambda2\terror\n")
        for (a, b), e in sorted(errors.items()):
            fh.write(f"{fmt(a)}\t{fmt(b)}\t{'NA' if e is None else fmt(e)}\n")


def cmd_fit(args):
    train = read_dataset(args.train)
    if not train.labeled:
        raise DataFileError(f"{args.train}: training data must be labeled")
    tuning = None
    if args.validate is not None or args.cv is not None:
        grid = _grid(args)
        base = _penalty_config(args, 0.0, 0.0)
        if args.validate is not None:
            val = read_dataset(args.validate)
            if not val.labeled:
                raise DataFileError(f"{args.validate}: validation data must be labeled")
            if val.shape != train.shape:
                raise DataFileError("training and validation matrices differ in shape")
            tuning = grid_search(train, val, grid, base)
            result = tuning.fit
        else:
            tuning = kfold_cv(train, args.cv, grid, base, seed=args.seed)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                result = fit(train, _penalty_config(args, *tuning.chosen))
        log.info("selected lambda1=%g lambda2=%g (error %.4g, %d tied cells)",
                 *tuning.chosen, tuning.min_error, tuning.ties)
        _write_tuning_table(args.out + ".tuning.tsv", tuning.errors)
    else:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            result = fit(train, _penalty_config(args, args.lambda1, args.lambda2))

    info = dict(result.params.metadata)
    info["outer_iterations"] = result.outer_iterations
    if not result.converged:
        log.warning("fit did not converge in %d outer iterations", result.outer_iterations)
    save_model(args.out, result.params, fit_info=info)
    with open(args.out + ".trace.tsv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("iteration\tobjective\n")
        for k, v in enumerate(result.objective_trace):
            fh.write(f"{k}\t{fmt(v)}\n")
    return EXIT_OK


def cmd_predict(args):
    params = load_model(args.model)
    data = read_dataset(args.data)
    if data.shape != params.shape:
        raise DataFileError(f"data matrices are {data.shape[0]}x{data.shape[1]} but the model "
                            f"expects {params.shape[0]}x{params.shape[1]}")
    if data.labeled and data.n_classes > params.n_classes:
        raise DataFileError(f"data has labels up to {data.n_classes}, model has "
                            f"{params.n_classes} classes")
    S = score_batch(data.X, params) if data.n else np.zeros((0, params.n_classes))
    pred = np.argmax(S, axis=1) + 1
    J = params.n_classes
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "true", "predicted"] + [f"score_{j}" for j in range(1, J + 1)])
        for i in range(data.n):
            true = str(int(data.y[i])) if data.labeled else "NA"
            w.writerow([i + 1, true, int(pred[i])] + [fmt(v) for v in S[i]])
    if data.labeled and data.n:
        print(f"misclassification_rate\t{fmt(misclassification_rate(pred, data.y))}")
    return EXIT_OK


def _bench_one(job):
    """One replicate: tuned fit (PMN) and the unpenalized MLE.  Returns rows or an error."""
    spec, grid = job
    try:
        rep = generate_replicate(spec)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            report = grid_search(rep.train, rep.validate, grid, PenaltyConfig())
            mle = fit(rep.train, PenaltyConfig())
        rows = []
        for method, res in (("PMN", report.fit), ("MLE", mle)):
            err = misclassification_rate(predict_batch(rep.test.X, res.params), rep.test.y)
            sup = support_metrics(res.params.means, rep.means)
            rows.append((method, err, sup.tpr, sup.tnr))
        return rows, None
    except (LinAlgFailure, ValueError, RuntimeError, FloatingPointError) as exc:
        return None, f"{type(exc).__name__}: {exc}"


def _num(x):
    return "NA" if x is None else fmt(x)


def cmd_bench(args):
    if args.reps < 1:
        raise UsageError("--reps must be at least 1")
    grid = _grid(args)
    jobs = []
    for r, c in args.dims:
        for rep in range(args.reps):
            seed = int(np.random.SeedSequence([args.seed, r, c, rep]).generate_state(1)[0])
            jobs.append(((r, c, rep), (_sim_spec(args, args.model, r, c, seed), grid)))
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            outcomes = list(ex.map(_bench_one, [j for _, j in jobs]))
    else:
        outcomes = [_bench_one(j) for _, j in jobs]

    failures = 0
    rows = []
    for (key, _), (res, err) in zip(jobs, outcomes):
        if res is None:
            failures += 1
            log.warning("replicate r=%d c=%d rep=%d failed: %s", *key, err)
            continue
        for method, miscls, tpr, tnr in res:
            rows.append((method, *key, miscls, tpr, tnr))

    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("method\tr\tc\trep\tmiscls\ttpr\ttnr\n")
        for method, r, c, rep, m, tp, tn in rows:
            fh.write(f"{method}\t{r}\t{c}\t{rep}\t{fmt(m)}\t{_num(tp)}\t{_num(tn)}\n")
        # aggregate footer: rep column holds "mean"
        for r, c in args.dims:
            for method in ("PMN", "MLE"):
                sel = [row for row in rows if row[0] == method and row[1:3] == (r, c)]
                if not sel:
                    continue
                cols = []
                for k in (4, 5, 6):
                    vals = [row[k] for row in sel if row[k] is not None]
                    cols.append(float(np.mean(vals)) if vals else None)
                fh.write(f"{method}\t{r}\t{c}\tmean\t" + "\t".join(_num(v) for v in cols) + "\n")
    if failures > 0.1 * len(jobs):
        log.error("%d of %d replicates failed", failures, len(jobs))
        return EXIT_NUMERIC
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "fit": cmd_fit, "predict": cmd_predict, "bench": cmd_bench}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    logging.getLogger("numba").setLevel(logging.WARNING)
    try:
        _resolve(args, _load_config(args.config))
        return COMMANDS[args.command](args)
    except UsageError as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except (DataFileError, EmptyClassError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_DATA
    except (LinAlgFailure, RuntimeError, FloatingPointError) as exc:
        log.error("numeric failure: %s", exc)
        return EXIT_NUMERIC
    except ValueError as exc:
        log.error("%s", exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
