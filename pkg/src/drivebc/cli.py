"""Command-line interface.

Subcommands: generate | preprocess | train | evaluate | plot | gradcheck.
Options resolve flag > config file > built-in default; the config file is an
INI document with one section per subcommand. Failures print a one-line
``error: ...`` to stderr and exit 1; usage problems exit 2.
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import archive, evaluation, models, plots
from .data import ParseError, ValidationError, load_segments
from .features import (PipelineConfig, build_all_windows, build_windows,
                       compute_accelerations, fit_normalizer,
                       smooth_accelerations)
from .geometry import DetectionConfig
from .nn import backend_name
from .simulate import GenerationError, ScenarioConfig, generate_corpus


class CliError(RuntimeError):
    pass


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="drivebc",
        description="Behavioral-cloning toolkit for acceleration prediction")
    parser.add_argument("--config", type=Path, default=None,
                        help="INI config file; sections named after subcommands")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="emit a synthetic car-following corpus")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--segments", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--split", type=float, default=None)
    p.add_argument("--profile", choices=["constant", "sinusoidal", "random_brake"],
                   default=None)
    p.add_argument("--embedding-dim", type=int, default=None)
    p.add_argument("--duration", type=float, default=None)
    p.add_argument("--rate", type=float, default=None)

    p = sub.add_parser("preprocess", help="JSONL segments to window archives")
    p.add_argument("--train", type=Path, required=True)
    p.add_argument("--val", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--history", type=int, default=None)
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--stride", type=int, default=None)
    p.add_argument("--smooth", type=int, default=None)
    p.add_argument("--tolerance", type=float, default=None)
    p.add_argument("--max-range", type=float, default=None)

    p = sub.add_parser("train", help="fit a model on a window archive")
    p.add_argument("--windows", type=Path, required=True,
                   help="directory holding train.windows and val.windows")
    p.add_argument("--variant", choices=list(models.VARIANTS), default=None)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--loss", choices=["mse", "mae"], default=None)
    p.add_argument("--hidden", type=int, default=None)
    p.add_argument("--run-json", type=Path, default=None,
                   help="training-run JSON (default: <out>.run.json)")
    p.add_argument("--quiet", action="store_true")

    p = sub.add_parser("evaluate", help="score an artifact on a window archive")
    p.add_argument("--artifact", type=Path, required=True)
    p.add_argument("--windows", type=Path, required=True,
                   help="a .windows file (the validation split)")
    p.add_argument("--out", type=Path, required=True, help="report JSON path")
    p.add_argument("--table", type=Path, default=None,
                   help="basename for results table (.txt and .csv)")
    p.add_argument("--baselines", action="store_true",
                   help="include zero and persistence reference rows")

    p = sub.add_parser("plot", help="render prediction vs truth for one segment")
    p.add_argument("--artifact", type=Path, required=True)
    p.add_argument("--data", type=Path, required=True, help="JSONL segment file")
    p.add_argument("--segment", type=str, default=None,
                   help="segment id (default: first in the file)")
    p.add_argument("--out", type=Path, required=True,
                   help="output basename (.svg and .csv)")
    p.add_argument("--smooth", type=int, default=None)
    p.add_argument("--tolerance", type=float, default=None)
    p.add_argument("--max-range", type=float, default=None)

    p = sub.add_parser("gradcheck", help="finite-difference check of tiny models")
    p.add_argument("--variant", choices=list(models.LSTM_VARIANTS) + ["all"],
                   default="all")
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    return parser


class _Options:
    """Resolves flag > config-file > default for one subcommand section."""

    def __init__(self, args: argparse.Namespace, section: str):
        self.args = args
        self.section = section
        self.cfg = configparser.ConfigParser()
        if args.config is not None:
            if not Path(args.config).exists():
                raise CliError(f"config file not found: {args.config}")
            self.cfg.read(args.config)

    def get(self, name: str, default, cast=None):
        flag = getattr(self.args, name.replace("-", "_"), None)
        if flag is not None:
            return flag
        if self.cfg.has_option(self.section, name):
            raw = self.cfg.get(self.section, name)
            caster = cast if cast is not None else type(default)
            return caster(raw)
        return default


def _cmd_generate(args) -> int:
    opt = _Options(args, "generate")
    cfg = ScenarioConfig(
        leader_profile=opt.get("profile", "random_brake"),
        embedding_dim=opt.get("embedding-dim", 0),
        duration_s=opt.get("duration", 20.0),
        rate_hz=opt.get("rate", 10.0),
    )
    manifest = generate_corpus(
        n_segments=opt.get("segments", 10),
        split_ratio=opt.get("split", 0.8),
        base_seed=opt.get("seed", 0),
        out_dir=args.out,
        cfg=cfg)
    print(f"wrote {len(manifest['train_segments'])} train / "
          f"{len(manifest['val_segments'])} val segments to {args.out}")
    return 0


def _pipeline_config(opt: _Options) -> PipelineConfig:
    return PipelineConfig(
        history_len=opt.get("history", 10),
        horizon_len=opt.get("horizon", 5),
        stride=opt.get("stride", 1),
        smooth_window=opt.get("smooth", 5),
        detection=DetectionConfig(tolerance=opt.get("tolerance", 1.0),
                                  max_range=opt.get("max-range", 100.0)))


def _cmd_preprocess(args) -> int:
    opt = _Options(args, "preprocess")
    pcfg = _pipeline_config(opt)
    meta = {"history_len": pcfg.history_len, "horizon_len": pcfg.horizon_len,
            "stride": pcfg.stride, "smooth_window": pcfg.smooth_window,
            "tolerance": pcfg.detection.tolerance,
            "max_range": pcfg.detection.max_range}
    train_samples = build_all_windows(load_segments(args.train), pcfg)
    val_samples = build_all_windows(load_segments(args.val), pcfg)
    if not train_samples:
        raise CliError("training split produced no windows")
    if not val_samples:
        raise CliError("validation split produced no windows")
    stats = fit_normalizer(train_samples)
    args.out.mkdir(parents=True, exist_ok=True)
    train_batch = archive.stack_windows(train_samples, normalizer=stats,
                                        meta={**meta, "dataset": args.train.name})
    val_batch = archive.stack_windows(val_samples, normalizer=stats,
                                      meta={**meta, "dataset": args.val.name})
    archive.save_windows(train_batch, args.out / "train.windows")
    archive.save_windows(val_batch, args.out / "val.windows")
    print(f"wrote {len(train_batch)} train / {len(val_batch)} val windows "
          f"to {args.out}")
    return 0


def _cmd_train(args) -> int:
    opt = _Options(args, "train")
    train_batch = archive.load_windows(args.windows / "train.windows")
    val_batch = archive.load_windows(args.windows / "val.windows")
    variant = opt.get("variant", "lstm_12")
    spec = models.ArchitectureSpec(
        variant=variant,
        hidden=opt.get("hidden", 128),
        embedding_dim=train_batch.embedding_dim,
        history_len=train_batch.features.shape[1],
        horizon_len=train_batch.target.shape[1])
    cfg = models.TrainConfig(
        epochs=opt.get("epochs", 300),
        batch_size=opt.get("batch-size", 64),
        learning_rate=opt.get("lr", 1e-3),
        seed=opt.get("seed", 0),
        loss=opt.get("loss", "mse"))
    log = None if args.quiet else lambda msg: print(msg, flush=True)
    run = models.train(spec, train_batch, val_batch, cfg, log=log)
    models.save_artifact(run.artifact, args.out)
    run_path = args.run_json or Path(f"{args.out}.run.json")
    run_doc = {
        "variant": variant,
        "config": run.artifact.config,
        "backend": backend_name(),
        "history": run.history,
        "val_mae_x": run.val_mae_x,
        "val_mae_y": run.val_mae_y,
        "seconds": run.seconds,
    }
    with open(run_path, "w", encoding="utf-8") as fh:
        json.dump(run_doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"saved {variant} artifact to {args.out} "
          f"(val MAE X {run.val_mae_x:.4f}, Y {run.val_mae_y:.4f})")
    return 0


def _cmd_evaluate(args) -> int:
    artifact = models.load_artifact(args.artifact)
    batch = archive.load_windows(args.windows)
    preds = models.predict_batch(artifact, batch)
    report = evaluation.evaluate_predictions(
        preds, batch, model_id=artifact.architecture,
        dataset_id=args.windows.name)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(report.to_json())
    reports = [report]
    if args.baselines:
        reports.append(evaluation.evaluate_predictions(
            models.zero_predictions(batch), batch, model_id="zero",
            dataset_id=args.windows.name))
        reports.append(evaluation.evaluate_predictions(
            models.persistence_predictions(batch), batch, model_id="persistence",
            dataset_id=args.windows.name))
    text, csv_text = evaluation.results_table(reports)
    print(text, end="")
    if args.table is not None:
        Path(f"{args.table}.txt").write_text(text, encoding="utf-8")
        Path(f"{args.table}.csv").write_text(csv_text, encoding="utf-8")
    return 0


def _cmd_plot(args) -> int:
    opt = _Options(args, "plot")
    artifact = models.load_artifact(args.artifact)
    segments = load_segments(args.data)
    if args.segment is None:
        segment = segments[0]
    else:
        match = [s for s in segments if s.segment_id == args.segment]
        if not match:
            raise CliError(f"segment {args.segment!r} not found in {args.data}")
        segment = match[0]
    pcfg = PipelineConfig(
        history_len=artifact.history_len,
        horizon_len=artifact.horizon_len,
        stride=1,
        smooth_window=opt.get("smooth", 5),
        detection=DetectionConfig(tolerance=opt.get("tolerance", 1.0),
                                  max_range=opt.get("max-range", 100.0)))
    samples = build_windows(segment, pcfg)
    if not samples:
        raise CliError(f"segment {segment.segment_id!r} is too short to window")
    batch = archive.stack_windows(samples)
    preds = models.predict_batch(artifact, batch)
    # One point per frame: each window contributes its first horizon step.
    frames = batch.start_index + artifact.history_len
    pred_series = preds[:, 0, :]
    truth = smooth_accelerations(compute_accelerations(segment),
                                 pcfg.smooth_window)
    truth_series = np.array(
        [truth.frames[i].ego_accel_g[:2] for i in frames])
    svg, csv_text = plots.render_plot(frames, pred_series, truth_series)
    Path(f"{args.out}.svg").write_text(svg, encoding="utf-8")
    Path(f"{args.out}.csv").write_text(csv_text, encoding="utf-8")
    print(f"wrote {args.out}.svg and {args.out}.csv "
          f"({len(frames)} frames of segment {segment.segment_id!r})")
    return 0


def _cmd_gradcheck(args) -> int:
    opt = _Options(args, "gradcheck")
    variants = (list(models.LSTM_VARIANTS) if args.variant == "all"
                else [args.variant])
    eps = opt.get("eps", 1e-5)
    tol = opt.get("tol", 1e-4)
    seed = opt.get("seed", 0)
    all_ok = True
    t0 = time.perf_counter()
    for variant in variants:
        report = models.grad_check_variant(variant, eps=eps, tol=tol, seed=seed)
        all_ok &= report.passed
        print(f"{variant}: {report}")
    print(f"backend {backend_name()}, {time.perf_counter() - t0:.1f} s")
    return 0 if all_ok else 1


_COMMANDS = {
    "generate": _cmd_generate,
    "preprocess": _cmd_preprocess,
    "train": _cmd_train,
    "evaluate": _cmd_evaluate,
    "plot": _cmd_plot,
    "gradcheck": _cmd_gradcheck,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (CliError, ParseError, ValidationError, GenerationError,
            models.ConfigurationError, models.TrainingDivergedError,
            models.StackedRegressorError, archive.ContainerError,
            ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
