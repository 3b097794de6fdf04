"""Command line front end.

stdout carries data, stderr carries diagnostics, and every run that writes
files also writes its fully resolved configuration next to them. Exit
codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .classify import LabelSet, build_queries, classify, evaluate
from .cluster import adjusted_rand, cluster_with_surprise, v_measure
from .errors import SurprisimError, UsageError
from .experiments import (
    StudySpec,
    crossover_study,
    emit_report,
    fewshot_study,
)
from .io import (
    RunConfig,
    check_labels_resolvable,
    load_embeddings,
    load_labels,
)
from .mixed import fit_rescale
from .stats import stats_from_similarities, _surprise_values
from .train import AdapterModel, TrainConfig, train
from .vectors import EmbeddingSet, _pairwise_values

logger = logging.getLogger("surprisim")


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; route through the usage error path
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="surprisim", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, train_flags: bool = False):
        p.add_argument("--config", help="JSON config file; flags take precedence")
        p.add_argument("--out", help="output directory")
        p.add_argument("--kind", help="cosine | euclidean | manhattan")
        p.add_argument("--estimator", help="gaussian | percentile")
        p.add_argument("--verbose", action="store_true")
        if train_flags:
            p.add_argument("--epsilon", type=float)
            p.add_argument("--gamma", type=float)
            p.add_argument("--delta", type=float)
            p.add_argument("--learning-rate", type=float, dest="learning_rate")
            p.add_argument("--weight-decay", type=float, dest="weight_decay")
            p.add_argument("--ce-threshold", type=float, dest="ce_threshold")
            p.add_argument("--batch-size", type=int, dest="batch_size")
            p.add_argument("--max-epochs", type=int, dest="max_epochs")
            p.add_argument("--seed", type=int)

    def mix_flags(p: argparse.ArgumentParser):
        group = p.add_mutually_exclusive_group()
        group.add_argument("--w", type=float, help="pin the mixing weight")
        group.add_argument("--n-cross", type=float, dest="n_cross")

    p_score = sub.add_parser("score", help="score key/query pairs")
    p_score.add_argument("--keys", required=True)
    p_score.add_argument("--queries", required=True)
    p_score.add_argument("--ensemble")
    mix_flags(p_score)
    common(p_score)

    p_classify = sub.add_parser("classify", help="zero/few-shot classification")
    p_classify.add_argument("--docs", required=True)
    p_classify.add_argument("--labels-embedded", required=True, dest="labels_embedded")
    p_classify.add_argument("--gold", required=True)
    p_classify.add_argument("--ensemble")
    p_classify.add_argument("--ensemble-sample", type=int, dest="ensemble_sample")
    p_classify.add_argument("--labels", help="comma-separated label order")
    p_classify.add_argument("--template")
    p_classify.add_argument("--adapter", help="adapter file from the train command")
    p_classify.add_argument("--seed", type=int)
    mix_flags(p_classify)
    common(p_classify)

    p_train = sub.add_parser("train", help="fit the linear adapter")
    p_train.add_argument("--docs", required=True)
    p_train.add_argument("--gold", required=True)
    p_train.add_argument("--labels-embedded", required=True, dest="labels_embedded")
    p_train.add_argument("--labels")
    p_train.add_argument("--template")
    common(p_train, train_flags=True)

    p_cluster = sub.add_parser("cluster", help="spherical k-means plus surprise assignment")
    p_cluster.add_argument("--docs", required=True)
    p_cluster.add_argument("--k", type=int, required=True)
    p_cluster.add_argument("--repeats", type=int)
    p_cluster.add_argument("--gold", required=True)
    p_cluster.add_argument("--master-seed", type=int, dest="master_seed")
    p_cluster.add_argument("--max-iter", type=int, dest="max_iter")
    p_cluster.add_argument("--tol", type=float)
    common(p_cluster)

    p_study = sub.add_parser("study", help="seeded comparison studies")
    study_sub = p_study.add_subparsers(dest="study_task", required=True)

    p_cross = study_sub.add_parser("crossover", help="F1 vs ensemble size")
    p_cross.add_argument("--docs", required=True)
    p_cross.add_argument("--labels-embedded", required=True, dest="labels_embedded")
    p_cross.add_argument("--gold", required=True)
    p_cross.add_argument("--sizes", help="comma-separated ensemble sizes")
    p_cross.add_argument("--repeats", type=int)
    p_cross.add_argument("--master-seed", type=int, dest="master_seed")
    p_cross.add_argument("--labels")
    p_cross.add_argument("--template")
    p_cross.add_argument("--format", choices=("csv", "text"), default="csv")
    common(p_cross)

    p_few = study_sub.add_parser("fewshot", help="F1 vs shot count")
    p_few.add_argument("--train-docs", required=True, dest="train_docs")
    p_few.add_argument("--train-gold", required=True, dest="train_gold")
    p_few.add_argument("--docs", required=True)
    p_few.add_argument("--gold", required=True)
    p_few.add_argument("--labels-embedded", required=True, dest="labels_embedded")
    p_few.add_argument("--shots", help="comma-separated shot counts")
    p_few.add_argument("--repeats", type=int)
    p_few.add_argument("--master-seed", type=int, dest="master_seed")
    p_few.add_argument("--unbalanced", action="store_true")
    p_few.add_argument("--n-cross", type=float, dest="n_cross")
    p_few.add_argument("--labels")
    p_few.add_argument("--template")
    p_few.add_argument("--format", choices=("csv", "text"), default="csv")
    common(p_few, train_flags=True)

    return parser


_CONFIG_KEYS = (
    "kind",
    "estimator",
    "template",
    "w",
    "n_cross",
    "epsilon",
    "gamma",
    "delta",
    "learning_rate",
    "weight_decay",
    "ce_threshold",
    "batch_size",
    "max_epochs",
    "seed",
    "repeats",
    "master_seed",
    "k",
    "max_iter",
    "tol",
)


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    overrides = {
        key: getattr(args, key) for key in _CONFIG_KEYS if hasattr(args, key)
    }
    if getattr(args, "sizes", None):
        overrides["ensemble_sizes"] = [int(v) for v in args.sizes.split(",")]
    if getattr(args, "shots", None):
        overrides["shot_counts"] = [int(v) for v in args.shots.split(",")]
    if getattr(args, "unbalanced", False):
        overrides["balanced"] = False
    return RunConfig.resolve(getattr(args, "config", None), overrides)


def _out_dir(args: argparse.Namespace) -> Path | None:
    if getattr(args, "out", None) is None:
        return None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _emit(out: Path | None, name: str, content: str) -> None:
    if out is None:
        sys.stdout.write(content)
    else:
        (out / name).write_text(content, encoding="utf-8", newline="\n")


def _train_config(config: RunConfig) -> TrainConfig:
    return TrainConfig(
        epsilon=config.epsilon,
        gamma=config.gamma,
        delta=config.delta,
        learning_rate=config.learning_rate,
        weight_decay=config.weight_decay,
        ce_threshold=config.ce_threshold,
        batch_size=config.batch_size,
        max_epochs=config.max_epochs,
        seed=config.seed,
    )


def _load_label_queries(args, config: RunConfig) -> tuple[LabelSet, EmbeddingSet]:
    embedded = load_embeddings(args.labels_embedded)
    if getattr(args, "labels", None):
        names = [v for v in args.labels.split(",") if v]
    else:
        names = list(embedded.ids)
    label_set = LabelSet(tuple(names), config.template)
    return label_set, build_queries(label_set, embedded)


def _cmd_score(args) -> int:
    config = _resolve_config(args)
    kind = config.similarity_kind()
    estimator = config.stats_estimator()
    keys = load_embeddings(args.keys)
    queries = load_embeddings(args.queries)
    ensemble = load_embeddings(args.ensemble) if args.ensemble else keys
    if keys.dimension != queries.dimension or keys.dimension != ensemble.dimension:
        raise UsageError("keys, queries, and ensemble must share one dimension")
    psi = _pairwise_values(keys.matrix, queries.matrix, kind)
    ens = _pairwise_values(ensemble.matrix, queries.matrix, kind)
    rescale = fit_rescale(ens.ravel())
    rescaled = rescale.apply(psi)
    surp = np.empty_like(psi)
    for j, qid in enumerate(queries.ids):
        st = stats_from_similarities(ens[:, j], qid, estimator, kind)
        surp[:, j] = _surprise_values(psi[:, j], st.mu, st.sigma)
    w = config.mix().effective_weight(len(ensemble))
    mixed = (1.0 - w) * rescaled + w * surp
    lines = ["key_id,query_id,plain,rescaled,surprise,mixed"]
    for i, key_id in enumerate(keys.ids):
        for j, query_id in enumerate(queries.ids):
            lines.append(
                f"{key_id},{query_id},{psi[i, j]:.6f},{rescaled[i, j]:.6f},"
                f"{surp[i, j]:.6f},{mixed[i, j]:.6f}"
            )
    out = _out_dir(args)
    _emit(out, "scores.csv", "\n".join(lines) + "\n")
    if out is not None:
        config.save(out / "run_config.json")
        logger.info("wrote %s", out / "scores.csv")
    return 0


def _cmd_classify(args) -> int:
    config = _resolve_config(args)
    kind = config.similarity_kind()
    estimator = config.stats_estimator()
    docs = load_embeddings(args.docs)
    gold = load_labels(args.gold)
    check_labels_resolvable(gold, docs)
    label_set, queries = _load_label_queries(args, config)
    ensemble = load_embeddings(args.ensemble) if args.ensemble else docs
    if args.ensemble_sample is not None:
        if not (1 <= args.ensemble_sample <= len(ensemble)):
            raise UsageError(
                f"--ensemble-sample must lie in [1, {len(ensemble)}]"
            )
        rng = np.random.default_rng(config.seed)
        ensemble = ensemble.subset(
            rng.choice(len(ensemble), size=args.ensemble_sample, replace=False)
        )
    adapter = None
    if args.adapter:
        adapter = AdapterModel.load(args.adapter)
        docs = adapter.transform_set(docs)
        queries = adapter.transform_set(queries)
        ensemble = adapter.transform_set(ensemble)
    mix = config.mix()
    predictions = classify(docs, queries, ensemble, mix, kind, estimator)
    metrics = evaluate(predictions, gold)
    lines = ["key_id,label,score"]
    for p in predictions:
        lines.append(f"{p.key_id},{p.label},{p.score:.6f}")
    out = _out_dir(args)
    _emit(out, "predictions.csv", "\n".join(lines) + "\n")
    payload = {
        "accuracy": metrics.accuracy,
        "macro_f1": metrics.macro_f1,
        "per_label_f1": metrics.per_label_f1,
        "effective_w": mix.effective_weight(len(ensemble)),
        "ensemble_size": len(ensemble),
        "n_docs": len(docs),
        "labels": list(label_set.labels),
        "adapter": args.adapter,
    }
    report = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out is None:
        sys.stderr.write(report)
    else:
        (out / "metrics.json").write_text(report, encoding="utf-8", newline="\n")
        config.save(out / "run_config.json")
    return 0


def _cmd_train(args) -> int:
    config = _resolve_config(args)
    docs = load_embeddings(args.docs)
    gold = load_labels(args.gold)
    check_labels_resolvable(gold, docs)
    _, queries = _load_label_queries(args, config)
    result = train(docs, gold, queries, _train_config(config))
    lines = ["epoch,mean_ce,mean_focal"]
    for row in result.history:
        lines.append(f"{row.epoch},{row.mean_ce:.6f},{row.mean_focal:.6f}")
    out = _out_dir(args)
    _emit(out, "history.csv", "\n".join(lines) + "\n")
    if out is not None:
        result.adapter.save(out / "adapter.bin")
        config.save(out / "run_config.json")
    summary = {
        "converged": result.converged,
        "epochs_run": result.epochs_run,
        "final_ce": result.history[-1].mean_ce,
    }
    sys.stderr.write(json.dumps(summary, sort_keys=True) + "\n")
    return 0


def _cmd_cluster(args) -> int:
    config = _resolve_config(args)
    estimator = config.stats_estimator()
    docs = load_embeddings(args.docs)
    gold_map = load_labels(args.gold)
    check_labels_resolvable(gold_map, docs)
    missing = [i for i in docs.ids if i not in gold_map]
    if missing:
        raise UsageError(f"gold labels missing for ids: {missing[:5]}")
    gold = [gold_map[i] for i in docs.ids]
    lines = [
        "repeat,seed,iterations,v_measure_cosine,ari_cosine,v_measure_surprise,ari_surprise"
    ]
    rows = []
    for repeat in range(config.repeats):
        seed = config.master_seed + repeat  # fixed offsets from the master seed
        result = cluster_with_surprise(
            docs, config.k, seed, estimator, config.max_iter, config.tol
        )
        row = (
            v_measure(gold, result.assignments_cosine),
            adjusted_rand(gold, result.assignments_cosine),
            v_measure(gold, result.assignments_surprise),
            adjusted_rand(gold, result.assignments_surprise),
        )
        rows.append(row)
        lines.append(
            f"{repeat},{seed},{result.iterations},"
            + ",".join(f"{v:.6f}" for v in row)
        )
    out = _out_dir(args)
    _emit(out, "cluster_runs.csv", "\n".join(lines) + "\n")
    arr = np.asarray(rows)
    std = arr.std(axis=0, ddof=1) if arr.shape[0] > 1 else np.zeros(4)
    summary = {
        name: {"mean": float(arr[:, i].mean()), "std": float(std[i])}
        for i, name in enumerate(
            ("v_measure_cosine", "ari_cosine", "v_measure_surprise", "ari_surprise")
        )
    }
    report = json.dumps(summary, indent=2, sort_keys=True) + "\n"
    if out is None:
        sys.stderr.write(report)
    else:
        (out / "cluster_summary.json").write_text(report, encoding="utf-8", newline="\n")
        config.save(out / "run_config.json")
    return 0


def _study_spec(config: RunConfig) -> StudySpec:
    return StudySpec(
        repeats=config.repeats,
        ensemble_sizes=config.ensemble_sizes,
        shot_counts=config.shot_counts,
        balanced=config.balanced,
        master_seed=config.master_seed,
        n_cross=config.n_cross,
        kind=config.similarity_kind(),
        estimator=config.stats_estimator(),
    )


def _write_study(args, config: RunConfig, result) -> int:
    out = _out_dir(args)
    if out is None:
        raise UsageError("study commands require --out")
    records_path, plot_path = emit_report(
        result.records, args.format, out / ("records.csv" if args.format == "csv" else "records.txt")
    )
    summary_lines = [
        "variant,size,runs,mean_accuracy,std_accuracy,mean_macro_f1,std_macro_f1"
    ]
    for row in result.summary:
        summary_lines.append(
            f"{row.variant},{row.size},{row.runs},{row.mean_accuracy:.6f},"
            f"{row.std_accuracy:.6f},{row.mean_macro_f1:.6f},{row.std_macro_f1:.6f}"
        )
    (out / "summary.csv").write_text(
        "\n".join(summary_lines) + "\n", encoding="utf-8", newline="\n"
    )
    if result.f1_ratio:
        ratio_lines = ["size,f1_ratio_cosine_over_surprise"]
        for size, ratio in result.f1_ratio:
            ratio_lines.append(f"{size},{ratio:.6f}")
        (out / "ratio.csv").write_text(
            "\n".join(ratio_lines) + "\n", encoding="utf-8", newline="\n"
        )
    config.save(out / "run_config.json")
    logger.info("wrote %s and %s", records_path, plot_path)
    return 0


def _cmd_study_crossover(args) -> int:
    config = _resolve_config(args)
    docs = load_embeddings(args.docs)
    gold = load_labels(args.gold)
    check_labels_resolvable(gold, docs)
    _, queries = _load_label_queries(args, config)
    result = crossover_study(docs, queries, gold, _study_spec(config))
    return _write_study(args, config, result)


def _cmd_study_fewshot(args) -> int:
    config = _resolve_config(args)
    train_docs = load_embeddings(args.train_docs)
    train_gold = load_labels(args.train_gold)
    check_labels_resolvable(train_gold, train_docs)
    test_docs = load_embeddings(args.docs)
    test_gold = load_labels(args.gold)
    check_labels_resolvable(test_gold, test_docs)
    _, queries = _load_label_queries(args, config)
    result = fewshot_study(
        train_docs,
        train_gold,
        test_docs,
        test_gold,
        queries,
        _study_spec(config),
        _train_config(config),
    )
    return _write_study(args, config, result)


_DISPATCH = {
    "score": _cmd_score,
    "classify": _cmd_classify,
    "train": _cmd_train,
    "cluster": _cmd_cluster,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "verbose", False):
            logging.basicConfig(stream=sys.stderr, level=logging.INFO)
        start = time.perf_counter()
        if args.command == "study":
            handler = (
                _cmd_study_crossover
                if args.study_task == "crossover"
                else _cmd_study_fewshot
            )
            code = handler(args)
        else:
            code = _DISPATCH[args.command](args)
        logger.info("finished in %.3fs", time.perf_counter() - start)
        return code
    except SurprisimError as exc:
        sys.stderr.write(f"error: {exc.kind}: {exc}\n")
        return exc.exit_code
    except OSError as exc:
        # unreadable inputs are wrapped by the loaders; this catches the
        # rest, e.g. an --out directory that cannot be created
        sys.stderr.write(f"error: data: {exc.strerror or exc}: {getattr(exc, 'filename', '')}\n")
        return DataError.exit_code


if __name__ == "__main__":
    sys.exit(main())
