"""``dyadsense`` command line: one subcommand per pipeline operation.

Exit codes: 0 success, 1 runtime or model error, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .config import ToolkitConfig, load_config, pipeline_config, scenario_params
from .dsp import extract_features, write_features
from .errors import ConfigError, DyadSenseError, ParseError
from .multimodal import (
    align_labels,
    evaluate_emotion,
    load_emotion_model,
    read_feature_csv,
    read_labels_csv,
    save_emotion_model,
    train_emotion_forest,
    train_emotion_svm,
    write_feature_csv,
    write_labels_csv,
)
from .sim import (
    ORACLE,
    generate_emotion_sessions,
    generate_vad_corpus,
    render_summary,
    run_battery,
    train_default_vad,
)
from .vad import (
    detect_segments,
    load_model,
    read_labeled_features,
    save_model,
    segments_to_json,
    train_linear_svm,
    write_labeled_features,
)
from .wavio import read_wav

log = logging.getLogger("dyadsense")

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


class CliContext:
    """Parsed global flags plus the loaded configuration."""

    def __init__(self, args: argparse.Namespace, config: ToolkitConfig):
        self.args = args
        self.config = config
        self.seed = args.seed
        self.out_dir = Path(args.out_dir) if args.out_dir else None

    def output(self, path) -> Path:
        p = Path(path)
        if self.out_dir is not None and not p.is_absolute():
            p = self.out_dir / p
        p.parent.mkdir(parents=True, exist_ok=True)
        return p

    def output_dir(self, path) -> Path:
        p = self.output(Path(path) / "_").parent
        p.mkdir(exist_ok=True)
        return p


def _emit(ctx: CliContext, text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        ctx.output(out).write_text(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# ---- subcommands -------------------------------------------------------------

def cmd_mfcc(ctx, a):
    audio = read_wav(a.input)
    feats = extract_features(audio, ctx.config.mfcc)
    fmt = a.format or ("jsonl" if str(a.out).endswith(".jsonl") else "csv")
    write_features(feats, ctx.output(a.out), fmt)
    log.info("wrote %d frames to %s", len(feats), a.out)


def cmd_make_corpus(ctx, a):
    corpus = generate_vad_corpus(ctx.seed, a.clips or ctx.config.simulation.corpus_clips,
                                 mfcc_config=ctx.config.mfcc)
    write_labeled_features(corpus.features, corpus.labels, ctx.output(a.out))


def cmd_vad_train(ctx, a):
    X, y = read_labeled_features(a.input)
    svm = ctx.config.svm
    model = train_linear_svm(X, y, lam=svm.lam, epochs=svm.epochs, seed=ctx.seed)
    save_model(model, ctx.output(a.out))


def cmd_vad_run(ctx, a):
    model = load_model(a.model)
    audio = read_wav(a.input)
    if audio.sample_rate != ctx.config.mfcc.sample_rate:
        raise ConfigError(f"{a.input}: sample rate {audio.sample_rate} Hz, "
                          f"configured {ctx.config.mfcc.sample_rate} Hz")
    segs = detect_segments(model, audio.samples, ctx.config.mfcc, ctx.config.hysteresis)
    _emit(ctx, _dump(segments_to_json(segs)), a.out)


def cmd_emotion_synth(ctx, a):
    sessions = generate_emotion_sessions(ctx.seed, a.sessions)
    write_feature_csv([fs for fs, _ in sessions], ctx.output(a.features))
    write_labels_csv({fs.session_id: lab for fs, lab in sessions}, ctx.output(a.labels))


def cmd_emotion_train(ctx, a):
    fsets = read_feature_csv(a.features)
    y = align_labels(fsets, read_labels_csv(a.labels), a.axis)
    if a.model_type == "svm":
        model = train_emotion_svm(fsets, y, a.axis, seed=ctx.seed)
    else:
        f = ctx.config.forest
        model = train_emotion_forest(fsets, y, a.axis, num_trees=f.num_trees, max_depth=f.max_depth,
                                     min_leaf=f.min_leaf, feature_subsample=f.feature_subsample,
                                     seed=ctx.seed)
    save_emotion_model(model, ctx.output(a.out))


def cmd_emotion_eval(ctx, a):
    model = load_emotion_model(a.model)
    result = evaluate_emotion(model, read_feature_csv(a.features), read_labels_csv(a.labels), a.axis)
    _emit(ctx, _dump(result), a.out)


def cmd_simulate(ctx, a):
    cfg = ctx.config
    if a.model == ORACLE:
        model = ORACLE
    elif a.model:
        model = load_model(a.model)
    else:
        model = train_default_vad(ctx.seed, cfg.simulation.corpus_clips, cfg.svm.lam, cfg.svm.epochs)
    seeds = range(ctx.seed, ctx.seed + a.scenarios)
    trace_dir = ctx.output_dir(a.dump_traces) if a.dump_traces else None
    summary = run_battery(seeds, model, scenario_params(cfg, a.density), pipeline_config(cfg),
                          workers=a.workers, trace_dir=trace_dir)
    summary["config_hash"] = cfg.digest()
    _emit(ctx, _dump(summary), a.out)


def cmd_report(ctx, a):
    try:
        summary = json.loads(Path(a.input).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{a.input}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    _emit(ctx, render_summary(summary, a.format), a.out)


# ---- parser ------------------------------------------------------------------

def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dyadsense", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="TOML configuration file")
    p.add_argument("--seed", type=int, default=42, help="master RNG seed (default 42)")
    p.add_argument("--out-dir", help="directory for relative output paths")
    p.add_argument("--log-level", default="WARNING",
                   choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    p.add_argument("--version", action="store_true", help="print version and config hash")
    sub = p.add_subparsers(dest="command", metavar="COMMAND")

    def add(name, func, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.set_defaults(func=func)
        # accepted after the subcommand too
        sp.add_argument("--seed", type=int, default=argparse.SUPPRESS)
        return sp

    sp = add("mfcc", cmd_mfcc, "MFCC features of a 16-bit mono PCM WAV")
    sp.add_argument("--input", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--format", choices=["csv", "jsonl"], help="default: from --out suffix")

    sp = add("make-corpus", cmd_make_corpus, "synthetic labelled VAD training frames")
    sp.add_argument("--out", required=True)
    sp.add_argument("--clips", type=_positive_int, help="clips per class")

    sp = add("vad-train", cmd_vad_train, "train a linear-SVM VAD from a labelled CSV")
    sp.add_argument("--input", required=True, help="CSV: feature columns then a label column")
    sp.add_argument("--out", required=True)

    sp = add("vad-run", cmd_vad_run, "speech segments of a WAV file")
    sp.add_argument("--model", required=True)
    sp.add_argument("--input", required=True)
    sp.add_argument("--out", help="JSON file (default: stdout)")

    sp = add("emotion-synth", cmd_emotion_synth, "synthetic session features and labels")
    sp.add_argument("--sessions", type=_positive_int, default=200)
    sp.add_argument("--features", required=True)
    sp.add_argument("--labels", required=True)

    for name, func, text in (("emotion-train", cmd_emotion_train, "train a valence/arousal model"),
                             ("emotion-eval", cmd_emotion_eval, "balanced accuracy of a model")):
        sp = add(name, func, text)
        sp.add_argument("--features", required=True)
        sp.add_argument("--labels", required=True)
        sp.add_argument("--axis", required=True, choices=["valence", "arousal"])
        if name == "emotion-train":
            sp.add_argument("--model-type", choices=["svm", "forest"], default="forest")
            sp.add_argument("--out", required=True)
        else:
            sp.add_argument("--model", required=True)
            sp.add_argument("--out", help="JSON file (default: stdout)")

    sp = add("simulate", cmd_simulate, "replay seeded scenarios and score triggers")
    sp.add_argument("--scenarios", type=_positive_int, default=1)
    sp.add_argument("--density", type=float, help="interaction density (default from config)")
    sp.add_argument("--model", help="VAD model JSON or 'oracle' (default: train one from --seed)")
    sp.add_argument("--workers", type=_positive_int, default=1)
    sp.add_argument("--dump-traces", metavar="DIR", help="write every intermediate stream")
    sp.add_argument("--out", help="report JSON (default: stdout)")

    sp = add("report", cmd_report, "render a simulation report as a table")
    sp.add_argument("--input", required=True)
    sp.add_argument("--format", choices=["text", "csv"], default="text")
    sp.add_argument("--out")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level, format="%(levelname)s %(name)s: %(message)s")
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print(f"dyadsense: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.version:
        print(f"dyadsense {__version__} (config {config.digest()})")
        return EXIT_OK
    if args.command is None:
        parser.print_usage(sys.stderr)
        print("dyadsense: a command is required", file=sys.stderr)
        return EXIT_USAGE
    ctx = CliContext(args, config)
    try:
        args.func(ctx, args)
    except (ParseError, ConfigError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"dyadsense: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DyadSenseError, OSError, ValueError) as exc:
        print(f"dyadsense: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
