"""Command-line front end: generate | train | audit | benchmark | report.

Exit codes: 0 success, 1 configuration error, 2 I/O error, 3 missing
prerequisite (dataset, checkpoint, results), 4 a benchmark condition failed.
"""

from __future__ import annotations

import argparse
import copy
import inspect
import json
import os
import sys
from dataclasses import asdict, fields, replace
from pathlib import Path

from vcrank import __version__

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2
EXIT_MISSING = 3
EXIT_CONDITION = 4

DATASET_KINDS = ("grid", "adversarial", "intervention")
EXPERIMENTS = ("grid", "adversarial", "both", "dots")


class ConfigError(ValueError):
    pass


class MissingPrerequisite(RuntimeError):
    pass


# -- configuration ------------------------------------------------------------


def _defaults() -> dict:
    """Resolved defaults, read off the library dataclasses where one exists."""
    from vcrank.concept_oracle import default_vocabulary
    from vcrank.evaluation.benchmark import BenchmarkConfig
    from vcrank.evaluation.intervention import DotExperimentConfig
    from vcrank.synthgen.datasets import DatasetConfig
    from vcrank.toy_lmm import TrainConfig
    from vcrank.vcr_core.vcr import VcrConfig

    ds = DatasetConfig("red_green")
    bench = BenchmarkConfig()
    dots = DotExperimentConfig()
    return {
        "seed": 0,
        "out": "vcr_out",
        "jobs": 1,
        "timing": False,
        "dataset": {
            "kind": "grid",
            "pair": "red_green",
            "rho_a": ds.rho_a,
            "rho_b": None,
            "n_train": ds.n_train,
            "n_test": ds.n_test,
        },
        "model": {"hook_layer": 1, "seq_len": 1},
        "train": {f.name: getattr(TrainConfig(), f.name) for f in fields(TrainConfig) if f.name != "seed"},
        "vcr": {f.name: getattr(VcrConfig(), f.name) for f in fields(VcrConfig) if f.name != "seed"},
        "audit": {
            "checkpoint": None,
            "probe_manifest": None,
            "vocabulary": None,
            "n_distractors": inspect.signature(default_vocabulary).parameters["n_distractors"].default,
            "target": "positive",
            "top_k": 20,
        },
        "benchmark": {
            "experiment": "grid",
            "replicates": bench.replicates,
            "pairs": list(bench.pairs),
            "rhos": list(bench.rhos),
            "n_train": bench.n_train,
            "n_test": bench.n_test,
        },
        "dots": {
            "pair": dots.pair,
            "rho_a": dots.rho_a,
            "correlated_rates": list(dots.correlated_rates),
            "uncorrelated_rates": list(dots.uncorrelated_rates),
            "n_probe": dots.n_probe,
            "n_augment": dots.n_augment,
            "replicates": dots.replicates,
            "n_dots": dots.n_dots,
            "radius": dots.radius,
        },
    }


def _type_ok(default, value) -> bool:
    if isinstance(default, bool):
        return isinstance(value, bool)
    if isinstance(default, int):
        return isinstance(value, int) and not isinstance(value, bool)
    if isinstance(default, float):
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if isinstance(default, str):
        return isinstance(value, str)
    if isinstance(default, list):
        return isinstance(value, list)
    return value is None or isinstance(value, (str, int, float))  # nullable slots


def _merge(base: dict, update: dict, path: str = "") -> None:
    for key, value in update.items():
        name = f"{path}{key}"
        if key not in base:
            raise ConfigError(f"unknown config key {name!r}")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"config key {name!r} must be an object")
            _merge(base[key], value, name + ".")
        elif not _type_ok(base[key], value):
            raise ConfigError(f"config key {name!r} has the wrong type: {value!r}")
        else:
            base[key] = float(value) if isinstance(base[key], float) else value


def resolve_config(path: str | None, args: argparse.Namespace | None = None, env=None) -> dict:
    """Defaults, then the JSON file, then flags, then ``VCR_OUT``."""
    cfg = copy.deepcopy(_defaults())
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            try:
                user = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(user, dict):
            raise ConfigError("config file must hold a JSON object")
        _merge(cfg, user)
    if args is not None:
        if args.seed is not None:
            cfg["seed"] = args.seed
        if args.out is not None:
            cfg["out"] = args.out
        if args.jobs is not None:
            cfg["jobs"] = args.jobs
        if args.timing:
            cfg["timing"] = True
    env = os.environ if env is None else env
    if env.get("VCR_OUT"):
        cfg["out"] = env["VCR_OUT"]
    _check(cfg)
    return cfg


def _check(cfg: dict) -> None:
    from vcrank.synthgen.images import PAIRS

    def need(cond, key, msg):
        if not cond:
            raise ConfigError(f"config key {key!r}: {msg}")

    need(0 <= cfg["seed"] < 2**64, "seed", "must be an unsigned 64-bit integer")
    need(cfg["jobs"] >= 1, "jobs", "must be >= 1")
    d = cfg["dataset"]
    need(d["kind"] in DATASET_KINDS, "dataset.kind", f"must be one of {DATASET_KINDS}")
    need(d["pair"] in PAIRS, "dataset.pair", f"unknown pair {d['pair']!r}")
    need(-1.0 <= d["rho_a"] <= 1.0, "dataset.rho_a", "must lie in [-1, 1]")
    need(d["rho_b"] is None or (isinstance(d["rho_b"], (int, float)) and -1.0 <= d["rho_b"] <= 1.0),
         "dataset.rho_b", "must be null or lie in [-1, 1]")
    for k in ("n_train", "n_test"):
        need(d[k] >= 2 and d[k] % 2 == 0, f"dataset.{k}", "must be an even count >= 2")
    need(cfg["model"]["hook_layer"] in (1, 2), "model.hook_layer", "must be 1 or 2")
    need(cfg["model"]["seq_len"] >= 1, "model.seq_len", "must be >= 1")
    t = cfg["train"]
    need(t["learning_rate"] > 0, "train.learning_rate", "must be > 0")
    need(t["batch_size"] >= 1, "train.batch_size", "must be >= 1")
    need(t["epochs"] >= 0, "train.epochs", "must be >= 0")
    v = cfg["vcr"]
    need(v["bootstrap_B"] >= 2, "vcr.bootstrap_B", "must be >= 2")
    need(0.0 < v["alpha"] < 1.0, "vcr.alpha", "must lie in (0, 1)")
    need(v["lam"] >= 0.0, "vcr.lam", "must be >= 0")
    a = cfg["audit"]
    need(a["target"] in ("positive", "negative"), "audit.target", "must be 'positive' or 'negative'")
    need(a["top_k"] >= 1, "audit.top_k", "must be >= 1")
    need(a["n_distractors"] >= 0, "audit.n_distractors", "must be >= 0")
    b = cfg["benchmark"]
    need(b["experiment"] in EXPERIMENTS, "benchmark.experiment", f"must be one of {EXPERIMENTS}")
    need(b["replicates"] >= 1, "benchmark.replicates", "must be >= 1")
    need(b["pairs"] and all(p in PAIRS for p in b["pairs"]), "benchmark.pairs", "must list known pairs")
    need(b["rhos"] and all(isinstance(r, (int, float)) and -1 <= r <= 1 for r in b["rhos"]),
         "benchmark.rhos", "must list values in [-1, 1]")
    dt = cfg["dots"]
    need(dt["pair"] in PAIRS, "dots.pair", f"unknown pair {dt['pair']!r}")
    for k in ("correlated_rates", "uncorrelated_rates"):
        r = dt[k]
        need(len(r) == 2 and all(isinstance(x, (int, float)) and 0 <= x <= 1 for x in r),
             f"dots.{k}", "must be two rates in [0, 1]")
    for k in ("n_probe", "n_augment", "replicates", "n_dots", "radius"):
        need(dt[k] >= 1, f"dots.{k}", "must be >= 1")


def provenance(cfg: dict, command: str) -> dict:
    return {"tool": "vcrank", "version": __version__, "command": command, "config": cfg}


def _comment(cfg: dict, command: str) -> str:
    return "provenance " + json.dumps(provenance(cfg, command), sort_keys=True, separators=(",", ":"))


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, allow_nan=True)
        fh.write("\n")


def _mkdir(path: Path) -> Path:
    path.mkdir(parents=True, exist_ok=True)
    if not os.access(path, os.W_OK):
        raise PermissionError(f"output directory {path} is not writable")
    return path


def _seed(cfg: dict, *tags) -> int:
    from vcrank.rng import derive_seed

    return derive_seed("cli", cfg["seed"], *tags)


def _train_config(cfg: dict, seed: int):
    from vcrank.toy_lmm import TrainConfig

    return TrainConfig(seed=seed, **cfg["train"])


def _vcr_config(cfg: dict, seed: int):
    from vcrank.vcr_core.vcr import VcrConfig

    return VcrConfig(seed=seed, **cfg["vcr"])


def _require(path: Path, what: str) -> Path:
    if not path.is_file():
        raise MissingPrerequisite(f"{what} not found: {path}")
    return path


# -- subcommands ---------------------------------------------------------------


def cmd_generate(cfg: dict) -> int:
    from vcrank.evaluation.intervention import dotted_training_set
    from vcrank.synthgen.datasets import (
        DatasetConfig,
        LabeledDataset,
        NEGATIVE,
        build_adversarial_sets,
        build_balanced_test_set,
        build_training_set,
        write_dataset,
    )
    from vcrank.synthgen.images import get_pair, render_feature_image
    from vcrank.synthgen.transforms import apply_dot_intervention

    d = cfg["dataset"]
    out = _mkdir(Path(cfg["out"]) / "data")
    comment = _comment(cfg, "generate")
    seed = cfg["seed"]
    if d["kind"] == "adversarial" and get_pair(d["pair"]).positional:
        raise ConfigError(f"config key 'dataset.pair': positional pair {d['pair']!r} has no adversarial sets")
    ds_cfg = DatasetConfig(d["pair"], d["n_train"], d["n_test"], d["rho_a"], d["rho_b"], base_seed=seed)
    if d["kind"] == "grid":
        sets = {"train": build_training_set(ds_cfg), "test": build_balanced_test_set(ds_cfg)}
    elif d["kind"] == "adversarial":
        train, test = build_adversarial_sets(d["pair"], seed)
        sets = {"train": train, "test": test}
    else:
        from vcrank.evaluation.intervention import DotExperimentConfig

        dots = DotExperimentConfig(seed=seed, pair=d["pair"], rho_a=d["rho_a"],
                                   correlated_rates=tuple(cfg["dots"]["correlated_rates"]))
        plain, dotted = [], []
        for i in range(d["n_test"]):
            img = render_feature_image(d["pair"], False, False, _seed(cfg, "probe", i))
            plain.append((img, NEGATIVE))
            dotted.append((apply_dot_intervention(img, seed=_seed(cfg, "probe-dots", i)), NEGATIVE))
        pair = get_pair(d["pair"])
        sets = {
            "train": dotted_training_set(dots, dots.correlated_rates, "correlated"),
            "test": LabeledDataset(plain, pair, "intervention_probe"),
            "test_dots": LabeledDataset(dotted, pair, "intervention_probe"),
        }
    summary = {}
    for prefix, data in sets.items():
        manifest = write_dataset(data, out, prefix, comment)
        summary[prefix] = {
            "manifest": manifest.name,
            "n": len(data),
            "positives": int(data.labels.sum()),
            "with_a": int(data.has_a.sum()),
            "with_b": int(data.has_b.sum()),
        }
    _write_json(out / "dataset.json", {"provenance": provenance(cfg, "generate"), "sets": summary})
    for prefix, info in summary.items():
        print(f"{prefix}: {info['n']} images -> {out / info['manifest']}")
    return EXIT_OK


def cmd_train(cfg: dict) -> int:
    from vcrank.synthgen.datasets import read_manifest
    from vcrank.toy_lmm import fine_tune, init_model, save_checkpoint, write_train_log

    root = Path(cfg["out"])
    manifest = _require(root / "data" / "train_manifest.csv", "training manifest (run 'generate' first)")
    data = read_manifest(manifest, cfg["dataset"]["pair"], "grid_train")
    out = _mkdir(root / "model")
    model = init_model(_seed(cfg, "init"), cfg["model"]["hook_layer"], cfg["model"]["seq_len"])
    model = fine_tune(model, data, _train_config(cfg, _seed(cfg, "train")))
    save_checkpoint(model, out / "model.ckpt")
    write_train_log(model, out / "train_log.csv")
    log = [{"epoch": e, "mean_loss": loss, "train_accuracy": acc} for e, loss, acc in model.train_log]
    _write_json(out / "train.json", {"provenance": provenance(cfg, "train"), "log": log})
    print(f"trained on {len(data)} images; final accuracy {log[-1]['train_accuracy']:.3f} -> {out / 'model.ckpt'}")
    return EXIT_OK


def _vocabulary(cfg: dict):
    from vcrank.concept_oracle import default_vocabulary, read_vocabulary

    path = cfg["audit"]["vocabulary"]
    if path is None:
        return default_vocabulary(cfg["audit"]["n_distractors"])
    return read_vocabulary(_require(Path(path), "vocabulary file"))


def cmd_audit(cfg: dict) -> int:
    from vcrank.evaluation.figures import plot_timing, plot_top_concepts
    from vcrank.synthgen.datasets import read_manifest
    from vcrank.timing import StageTimer
    from vcrank.toy_lmm import load_checkpoint
    from vcrank.vcr_core.vcr import bonferroni_threshold, run_vcr, write_records_csv, write_records_json

    root = Path(cfg["out"])
    a = cfg["audit"]
    ckpt = _require(Path(a["checkpoint"]) if a["checkpoint"] else root / "model" / "model.ckpt", "checkpoint")
    probe_path = _require(
        Path(a["probe_manifest"]) if a["probe_manifest"] else root / "data" / "test_manifest.csv", "probe manifest"
    )
    timer = StageTimer()
    timer.start()
    with timer.section("model_setup"):
        model = load_checkpoint(ckpt)
    probe = read_manifest(probe_path, cfg["dataset"]["pair"])
    with timer.section("concept_embedding"):
        vocab = _vocabulary(cfg)
    vcfg = _vcr_config(cfg, _seed(cfg, "vcr"))
    records = run_vcr(model, probe.images, vocab, vcfg, timer, target_label=a["target"])
    timer.stop()
    breakdown = timer.breakdown()

    out = _mkdir(root / "audit")
    prov = provenance(cfg, "audit")
    extra = {"provenance": prov, "alpha": vcfg.alpha, "probe_size": len(probe)}
    if cfg["timing"]:
        extra["timing"] = breakdown.as_dict() | {"total": breakdown.total}
    write_records_csv(records, out / "records.csv", _comment(cfg, "audit"))
    write_records_json(records, out / "records.json", vcfg, extra)
    drawn = plot_top_concepts(records, out / "top_concepts.svg", a["top_k"], prov)
    if cfg["timing"]:
        _write_json(out / "timing.json", {"provenance": prov, "timing": extra["timing"]})
        plot_timing({"audit": breakdown}, out / "timing.svg", prov)
    n_sig = sum(r.significant for r in records)
    print(f"K={len(records)} threshold={bonferroni_threshold(vcfg.alpha, len(records)):.3g} significant={n_sig}")
    for r in records[: min(5, len(records))]:
        print(f"  {r.concept_name:<16} psi={r.psi_mean:+.4g} p={r.p_value:.3g}{' *' if r.significant else ''}")
    if cfg["timing"]:
        print("timing " + " ".join(f"{k}={v:.3f}s" for k, v in extra["timing"].items()))
    print(f"wrote {out} ({drawn} concepts drawn)")
    return EXIT_OK


def _benchmark_config(cfg: dict):
    from vcrank.evaluation.benchmark import BenchmarkConfig

    b = cfg["benchmark"]
    return BenchmarkConfig(
        seed=cfg["seed"],
        replicates=b["replicates"],
        pairs=tuple(b["pairs"]),
        rhos=tuple(float(r) for r in b["rhos"]),
        n_train=b["n_train"],
        n_test=b["n_test"],
        hook_layer=cfg["model"]["hook_layer"],
        train=_train_config(cfg, 0),
        vcr=_vcr_config(cfg, 0),
        jobs=cfg["jobs"],
    )


def _run_grid(cfg: dict, bcfg, out: Path) -> None:
    from vcrank.evaluation import benchmark as bm
    from vcrank.evaluation.figures import plot_grid_scatter, plot_per_pair_r

    rows = bm.run_correlation_grid(bcfg)
    summary = bm.grid_summary(rows)
    prov = provenance(cfg, "benchmark")
    bm.write_rows_csv(rows, out / "grid_rows.csv", bm.GRID_COLUMNS, _comment(cfg, "benchmark"))
    _write_json(out / "grid.json", {"provenance": prov, "summary": summary, "rows": [asdict(r) for r in rows]})
    plot_grid_scatter(rows, out / "grid_scatter.svg", prov)
    plot_per_pair_r(summary, out / "grid_per_pair.svg", prov)
    print(f"grid: {len(rows)} rows, pooled r(VCR, delta)={_f(summary['pooled_vcr_r'])} "
          f"r(correlational, delta)={_f(summary['pooled_clip_r'])}")


def _run_adversarial(cfg: dict, bcfg, out: Path) -> None:
    from vcrank.evaluation import benchmark as bm
    from vcrank.evaluation.figures import plot_concordance

    rows = bm.run_adversarial_benchmark(bcfg)
    summary = bm.adversarial_summary(rows)
    prov = provenance(cfg, "benchmark")
    bm.write_rows_csv(rows, out / "adversarial_rows.csv", bm.ADVERSARIAL_COLUMNS, _comment(cfg, "benchmark"))
    _write_json(out / "adversarial.json", {"provenance": prov, "summary": summary, "rows": [asdict(r) for r in rows]})
    plot_concordance(summary, out / "adversarial_concordance.svg", prov)
    print("adversarial concordance: " + " ".join(
        f"{m}_{d}={_f(summary[f'{m}_{d}'])}" for m in ("vcr", "clip") for d in ("reliable", "spurious")))


def _run_dots(cfg: dict, out: Path) -> None:
    from vcrank.evaluation.figures import plot_dot_effect
    from vcrank.evaluation.intervention import DotExperimentConfig, run_dot_experiment

    d = cfg["dots"]
    dcfg = DotExperimentConfig(
        seed=cfg["seed"],
        pair=d["pair"],
        rho_a=d["rho_a"],
        correlated_rates=tuple(d["correlated_rates"]),
        uncorrelated_rates=tuple(d["uncorrelated_rates"]),
        n_probe=d["n_probe"],
        n_augment=d["n_augment"],
        replicates=d["replicates"],
        n_dots=d["n_dots"],
        radius=d["radius"],
        train=_train_config(cfg, 0),
    )
    result = run_dot_experiment(dcfg)
    prov = provenance(cfg, "benchmark")
    _write_json(out / "dots.json", {"provenance": prov, "result": result})
    plot_dot_effect(result, out / "dots.svg", prov)
    for tag in ("correlated", "uncorrelated"):
        r = result[tag]
        print(f"dots {tag}: delta={r['delta']:+.4f} no-dot spread={r['no_dot_spread']:.4f}")


def _f(v) -> str:
    return "n/a" if v is None else f"{v:.3f}"


def cmd_benchmark(cfg: dict) -> int:
    from vcrank.evaluation.benchmark import BenchmarkError

    out = _mkdir(Path(cfg["out"]) / "benchmark")
    exp = cfg["benchmark"]["experiment"]
    try:
        bcfg = _benchmark_config(cfg)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    stage = exp
    try:
        if exp in ("grid", "both"):
            stage = "grid"
            _run_grid(cfg, bcfg, out)
        if exp in ("adversarial", "both"):
            stage = "adversarial"
            _run_adversarial(cfg, bcfg, out)
        if exp == "dots":
            _run_dots(cfg, out)
    except BenchmarkError as exc:
        manifest = out / f"{stage}_incomplete.json"
        _write_json(manifest, {
            "provenance": provenance(cfg, "benchmark"),
            "error": str(exc),
            "failed_condition": list(exc.condition) if exc.condition else None,
            "completed_conditions": [list(c) for c in exc.completed],
        })
        print(f"error: {exc}; completed conditions listed in {manifest}", file=sys.stderr)
        return EXIT_CONDITION
    return EXIT_OK


def _records_from_json(payload: dict):
    import numpy as np

    from vcrank.vcr_core.vcr import SensitivityRecord

    return [
        SensitivityRecord(r["concept"], np.asarray(r["psi_samples"], dtype=float), r["psi_mean"], r["t"], r["p"],
                          r["significant"], r["direction"])
        for r in payload["records"]
    ]


def _load(path: Path) -> dict | None:
    if not path.is_file():
        return None
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def cmd_report(cfg: dict) -> int:
    from vcrank.evaluation import figures
    from vcrank.evaluation.benchmark import ExperimentRow
    from vcrank.timing import TimingBreakdown

    root = Path(cfg["out"])
    audit = _load(root / "audit" / "records.json")
    grid = _load(root / "benchmark" / "grid.json")
    adv = _load(root / "benchmark" / "adversarial.json")
    dots = _load(root / "benchmark" / "dots.json")
    if not any((audit, grid, adv, dots)):
        raise MissingPrerequisite(f"no audit or benchmark results under {root}")
    out = _mkdir(root / "report")
    prov = provenance(cfg, "report")
    made = []
    if audit is not None:
        figures.plot_top_concepts(_records_from_json(audit), out / "top_concepts.svg", cfg["audit"]["top_k"], prov)
        made.append("top_concepts.svg")
        if "timing" in audit:
            t = {k: v for k, v in audit["timing"].items() if k != "total"}
            figures.plot_timing({"audit": TimingBreakdown(**t)}, out / "timing.svg", prov)
            made.append("timing.svg")
    if grid is not None:
        rows = [ExperimentRow(**r) for r in grid["rows"]]
        figures.plot_grid_scatter(rows, out / "grid_scatter.svg", prov)
        figures.plot_per_pair_r(grid["summary"], out / "grid_per_pair.svg", prov)
        made += ["grid_scatter.svg", "grid_per_pair.svg"]
    if adv is not None:
        figures.plot_concordance(adv["summary"], out / "adversarial_concordance.svg", prov)
        made.append("adversarial_concordance.svg")
    if dots is not None:
        figures.plot_dot_effect(dots["result"], out / "dots.svg", prov)
        made.append("dots.svg")
    _write_json(out / "report.json", {"provenance": prov, "figures": made})
    print(f"rendered {len(made)} figures into {out}")
    return EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "train": cmd_train,
    "audit": cmd_audit,
    "benchmark": cmd_benchmark,
    "report": cmd_report,
}


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON config file (unknown keys are rejected)")
    common.add_argument("--seed", type=_u64, metavar="U64", help="global seed")
    common.add_argument("--out", metavar="DIR", help="output root (VCR_OUT overrides)")
    common.add_argument("--jobs", type=int, metavar="N", help="benchmark worker processes")
    common.add_argument("--timing", action="store_true", help="record the per-component audit timing")
    parser = argparse.ArgumentParser(prog="vcrank", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"vcrank {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=(fn.__doc__ or name).splitlines()[0])
    return parser


cmd_generate.__doc__ = "write PPM images and manifests for a grid, adversarial or intervention dataset"
cmd_train.__doc__ = "fine-tune the toy model on the generated training manifest"
cmd_audit.__doc__ = "rank concepts for a trained checkpoint on the probe manifest"
cmd_benchmark.__doc__ = "run the correlation grid, adversarial benchmark or dot intervention"
cmd_report.__doc__ = "re-render SVG figures from existing audit and benchmark results"


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors with status 2
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        cfg = resolve_config(args.config, args)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MissingPrerequisite as exc:
        print(f"missing prerequisite: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
