"""Command-line interface.

Subcommands: fit, predict, experiment, sensitivity, shards,
uncertainty, generate. Exit codes: 0 success, 1 runtime failure,
2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from .dmr import fit_dmr
from .errors import ConfigError, JacobiPriorError
from .glm import JacobiHyper, default_hyper, fit_jacobi
from .hyper import sensitivity_grid, stochastic_search
from .mc import sample_beta, summarize
from .modelio import StoredModel, labels_to_counts, load_csv_dataset
from .partition import run_harness, shard_message_json, shard_stats
from .rng import SeedSpec, derive_rng
from .simlab import (
    EXP_LOGISTIC_BETA,
    EXP_POISSON_BETA,
    ExperimentConfig,
    gen_circular,
    gen_dmr,
    gen_logistic,
    gen_poisson,
    gen_sinc,
    run_experiment,
)

GLM_FAMILIES = ("logit", "probit", "poisson")


def _hyper_from_args(args, family: str) -> JacobiHyper:
    schedule = "one_over_n" if args.schedule == "one-over-n" else "fixed"
    if args.a is None and args.b is None:
        base = default_hyper(family if family in GLM_FAMILIES else "poisson")
        return JacobiHyper(base.a, base.b, schedule)
    if args.a is None or args.b is None:
        raise ConfigError("--a and --b must be given together")
    return JacobiHyper(args.a, args.b, schedule)


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def cmd_fit(args) -> int:
    family = args.family
    if family == "multinomial":
        if args.classes is None:
            raise ConfigError("--family multinomial requires --classes")
        data = load_csv_dataset(args.train, classes=args.classes)
        counts, class_names = labels_to_counts(data.labels)
        hyper = _hyper_from_args(args, "poisson")
        model = fit_dmr(data.X, counts, hyper)
        stored = StoredModel.from_dmr(model, data.feature_names, class_names)
    else:
        if args.target is None:
            raise ConfigError("--target is required for single-response families")
        data = load_csv_dataset(args.train, target=args.target)
        hyper = _hyper_from_args(args, family)
        model = fit_jacobi(data.X, data.y, family, hyper)
        stored = StoredModel.from_glm(model, data.feature_names)
    stored.save(args.model_out)
    a, b = stored.a_effective, stored.b_effective
    print(f"fitted {family} model on n={stored.n_train} (a={a:g}, b={b:g}) -> {args.model_out}")
    return 0


def cmd_predict(args) -> int:
    stored = StoredModel.load(args.model)
    data = load_csv_dataset(args.data, features=stored.feature_names)
    if stored.kind == "glm":
        preds = stored.predict_mean(data)
        _write_csv(args.out, ["prediction"], [[repr(float(p))] for p in preds])
    else:
        probs = stored.predict_mean(data)
        classes = stored.predict_class_names(data)
        header = [f"prob_{c}" for c in stored.class_names] + ["class"]
        rows = [
            [repr(float(p)) for p in probs[i]] + [classes[i]]
            for i in range(probs.shape[0])
        ]
        _write_csv(args.out, header, rows)
    print(f"wrote {data.n} predictions -> {args.out}")
    return 0


def cmd_experiment(args) -> int:
    with open(args.config, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config}: invalid JSON: {exc}") from exc
    config = ExperimentConfig.from_dict(doc)
    report = run_experiment(config)
    os.makedirs(args.out, exist_ok=True)
    csv_path = os.path.join(args.out, f"{config.name}.csv")
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write(report.to_csv_text())
    table_path = os.path.join(args.out, f"{config.name}.txt")
    with open(table_path, "w", encoding="utf-8") as fh:
        fh.write(report.to_table_text())
    if args.format == "table":
        print(report.to_table_text(), end="")
    else:
        print(report.to_csv_text(), end="")
    failed = sum(r.n_failed for r in report.rows)
    return 1 if failed == config.n_reps * len(config.methods) else 0


def _grid_values(args):
    if args.a_values:
        a = [float(v) for v in args.a_values.split(",")]
    else:
        a = np.linspace(args.grid_min, args.grid_max, args.grid_steps).tolist()
    if args.b_values:
        b = [float(v) for v in args.b_values.split(",")]
    else:
        b = np.linspace(args.grid_min, args.grid_max, args.grid_steps).tolist()
    return a, b


def cmd_sensitivity(args) -> int:
    train = load_csv_dataset(args.train, target=args.target)
    test = load_csv_dataset(args.test, target=args.target)
    a_values, b_values = _grid_values(args)
    report = sensitivity_grid(
        train.X, train.y, test.X, test.y, args.family, a_values, b_values
    )
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(report.to_csv_text())
    a, b, score = report.best()
    print(f"best cell a={a:g} b={b:g} score={score:.6f} -> {args.out}")
    return 0


def cmd_search(args) -> int:
    train = load_csv_dataset(args.train, target=args.target)
    val = load_csv_dataset(
        args.val, target=args.target, disbursement=args.disbursement
    )
    result = stochastic_search(
        train.X,
        train.y,
        val.X,
        val.y,
        args.family,
        budget=args.budget,
        seed=SeedSpec(args.seed, args.stream),
        objective=args.objective,
        disbursement=val.disbursement,
    )
    _write_csv(
        args.out,
        ["a", "b", "score"],
        [[repr(a), repr(b), repr(s)] for a, b, s in result.trace],
    )
    print(
        f"best a={result.best_a:g} b={result.best_b:g} score={result.best_score:.6f} "
        f"({len(result.trace)} evaluated, {result.skipped} skipped) -> {args.out}"
    )
    return 0


def cmd_shards(args) -> int:
    data = load_csv_dataset(args.data, target=args.target)
    hyper = _hyper_from_args(args, args.family)
    result = run_harness(
        data.X,
        data.y,
        args.shards,
        args.family,
        hyper,
        seed=SeedSpec(args.seed, args.stream),
        max_workers=args.threads,
    )
    if args.emit_partials:
        blocks = np.array_split(np.arange(data.n), args.shards)
        partials = [
            shard_message_json(
                shard_stats(
                    data.X[rows], data.y[rows], args.family, hyper,
                    n_total=data.n, shard_id=m,
                )
            )
            for m, rows in enumerate(blocks)
        ]
        with open(args.emit_partials, "w", encoding="utf-8") as fh:
            json.dump(partials, fh, indent=2)
            fh.write("\n")
    if args.out:
        _write_csv(
            args.out,
            ["feature", "coefficient"],
            [[name, repr(float(v))] for name, v in zip(data.feature_names, result.beta)],
        )
    print(f"pooled fit over {result.n_shards} shards (dropped {result.duplicates_dropped} duplicates)")
    for m, dt in enumerate(result.shard_seconds):
        print(f"  shard {m}: {dt * 1e3:.3f} ms")
    print("beta:", " ".join(f"{v:.10g}" for v in result.beta))
    return 0


def cmd_uncertainty(args) -> int:
    data = load_csv_dataset(args.data, target=args.target)
    hyper = _hyper_from_args(args, args.family)
    draws = sample_beta(
        data.X,
        data.y,
        args.family,
        hyper,
        n_draws=args.draws,
        seed=SeedSpec(args.seed, args.stream),
        workers=args.threads,
    )
    summary = summarize(draws, level=args.level)
    rows = [
        [
            name,
            repr(float(summary.mean[j])),
            repr(float(summary.sd[j])),
            repr(float(summary.lower[j])),
            repr(float(summary.upper[j])),
        ]
        for j, name in enumerate(data.feature_names)
    ]
    _write_csv(args.out, ["feature", "mean", "sd", "lower", "upper"], rows)
    print(f"{args.draws} draws, {args.level:.0%} intervals -> {args.out}")
    return 0


def cmd_generate(args) -> int:
    rng = derive_rng(SeedSpec(args.seed, args.stream), 0)
    if args.kind == "logistic":
        X, y = gen_logistic(args.n, EXP_LOGISTIC_BETA, 3.0, 0.5, rng)
        header = [f"x{j + 1}" for j in range(X.shape[1])] + ["y"]
        rows = [[repr(float(v)) for v in X[i]] + [str(int(y[i]))] for i in range(args.n)]
    elif args.kind == "poisson":
        X, y = gen_poisson(args.n, EXP_POISSON_BETA, 1.0, 0.5, rng)
        header = [f"x{j + 1}" for j in range(X.shape[1])] + ["y"]
        rows = [[repr(float(v)) for v in X[i]] + [str(int(y[i]))] for i in range(args.n)]
    elif args.kind == "dmr":
        X, counts, _ = gen_dmr(args.n, args.n_features, args.n_classes, rng)
        # Drop the generator's intercept column; the CSV carries raw features.
        feats = X[:, 1:]
        header = [f"x{j + 1}" for j in range(feats.shape[1])] + [
            f"count_{k}" for k in range(counts.n_classes)
        ]
        rows = [
            [repr(float(v)) for v in feats[i]]
            + [str(int(c)) for c in counts.counts[i]]
            for i in range(args.n)
        ]
    elif args.kind == "sinc":
        X, y = gen_sinc(args.n, rng, noise_sd=args.noise_sd)
        header = ["x", "y"]
        rows = [[repr(float(X[i, 0])), str(int(y[i]))] for i in range(args.n)]
    else:
        X, y = gen_circular(args.n, rng)
        header = ["x1", "x2", "y"]
        rows = [
            [repr(float(X[i, 0])), repr(float(X[i, 1])), str(int(y[i]))]
            for i in range(args.n)
        ]
    _write_csv(args.out, header, rows)
    print(f"wrote {args.n} rows -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="root seed")
    common.add_argument("--stream", type=int, default=0, help="seed stream id")
    common.add_argument("--threads", type=int, default=1, help="worker threads")
    common.add_argument("--format", choices=("csv", "table"), default="csv")

    hyper_flags = argparse.ArgumentParser(add_help=False)
    hyper_flags.add_argument("--a", type=float, default=None, help="prior shape a")
    hyper_flags.add_argument("--b", type=float, default=None, help="prior shape b")
    hyper_flags.add_argument(
        "--schedule", choices=("fixed", "one-over-n"), default="fixed"
    )

    parser = argparse.ArgumentParser(
        prog="jacobiprior",
        description="Closed-form posterior-mode GLM toolkit and experiment harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", parents=[common, hyper_flags], help="fit a model from CSV")
    p.add_argument("--train", required=True)
    p.add_argument("--target", default=None, help="numeric response column")
    p.add_argument("--classes", default=None, help="class label column (multinomial)")
    p.add_argument(
        "--family",
        choices=GLM_FAMILIES + ("multinomial",),
        default="logit",
    )
    p.add_argument("--model-out", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", parents=[common], help="predict from a stored model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("experiment", parents=[common], help="run a replication experiment")
    p.add_argument("--config", required=True, help="JSON experiment config")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser(
        "sensitivity", parents=[common], help="shape-pair sensitivity grid"
    )
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--family", choices=GLM_FAMILIES, default="logit")
    p.add_argument("--grid-min", type=float, default=0.05)
    p.add_argument("--grid-max", type=float, default=2.0)
    p.add_argument("--grid-steps", type=int, default=12)
    p.add_argument("--a-values", default=None, help="comma-separated a grid")
    p.add_argument("--b-values", default=None, help="comma-separated b grid")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sensitivity)

    p = sub.add_parser("search", parents=[common], help="stochastic shape-pair search")
    p.add_argument("--train", required=True)
    p.add_argument("--val", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--family", choices=GLM_FAMILIES, default="logit")
    p.add_argument("--budget", type=int, default=50)
    p.add_argument("--objective", choices=("rmse", "accuracy", "utility"), default="rmse")
    p.add_argument("--disbursement", default=None, help="loan amount column (utility)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser(
        "shards", parents=[common, hyper_flags], help="partitioned distributed fit"
    )
    p.add_argument("--data", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--family", choices=GLM_FAMILIES, default="logit")
    p.add_argument("--shards", type=int, required=True)
    p.add_argument("--emit-partials", default=None, help="JSON debug dump path")
    p.add_argument("--out", default=None, help="coefficient CSV path")
    p.set_defaults(func=cmd_shards)

    p = sub.add_parser(
        "uncertainty", parents=[common, hyper_flags], help="Monte Carlo coefficient draws"
    )
    p.add_argument("--data", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--family", choices=GLM_FAMILIES, default="logit")
    p.add_argument("--draws", type=int, default=1000)
    p.add_argument("--level", type=float, default=0.9)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_uncertainty)

    p = sub.add_parser("generate", parents=[common], help="write synthetic datasets")
    p.add_argument(
        "--kind",
        choices=("logistic", "poisson", "dmr", "sinc", "circular"),
        required=True,
    )
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--noise-sd", type=float, default=0.1)
    p.add_argument("--n-features", type=int, default=3)
    p.add_argument("--n-classes", type=int, default=4)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except JacobiPriorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
