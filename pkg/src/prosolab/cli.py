"""Command-line entry point: annotate, calibrate, train, predict, evaluate,
learning-curve.

Every run is reproducible: flat key=value config files, explicit seeds, and
deterministic training make identical inputs produce identical output bytes
(the manifest timestamp line is the single exception).  Exit codes: 0 success,
1 data/validation failure, 2 usage or config failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import evaluation
from .corpus_io import (CorpusFormatError, ProminenceRecord, Utterance,
                        is_punctuation, load_embeddings, parse_dataset,
                        parse_lab, parse_textgrid, read_wav, write_dataset)
from .discretize import Thresholds, calibrate_binary, split_prominent
from .prominence import (AnnotateConfig, AnnotationError, CompositeConfig,
                         ScaleGrid, annotate_utterance)
from .acoustics import PitchConfig
from .taggers import (crf_loglik_grad, crf_train, load_model, predict_embed,
                      predict_majority, save_model, train_embed_classifier,
                      train_majority, viterbi)
from .taggers.common import LabeledSentence, sentence_from_records
from .taggers.crf import CrfModel
from .taggers.embed import EmbeddingClassifier
from .taggers.majority import MajorityModel

log = logging.getLogger("prosolab")


class UsageError(Exception):
    """Bad flags or config contents; maps to exit code 2."""


# ---------------------------------------------------------------------------
# config handling
# ---------------------------------------------------------------------------

def load_config(path: str | None) -> dict[str, str]:
    if path is None:
        return {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"unreadable config {path}: {exc}") from exc
    cfg = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"config line {lineno}: expected key=value")
        key, value = line.split("=", 1)
        cfg[key.strip()] = value.strip()
    return cfg


def _cfg_float(cfg: dict[str, str], key: str, default: float) -> float:
    if key not in cfg:
        return default
    try:
        return float(cfg[key])
    except ValueError as exc:
        raise UsageError(f"config key {key}: not a number: {cfg[key]!r}") from exc


def _cfg_int(cfg: dict[str, str], key: str, default: int) -> int:
    if key not in cfg:
        return default
    try:
        return int(cfg[key])
    except ValueError as exc:
        raise UsageError(f"config key {key}: not an integer: {cfg[key]!r}") from exc


def build_annotate_config(cfg: dict[str, str], n_classes: int) -> AnnotateConfig:
    frame_shift = _cfg_float(cfg, "frame_shift_s", 0.005)
    pitch = PitchConfig(
        f0_min=_cfg_float(cfg, "f0_min", 60.0),
        f0_max=_cfg_float(cfg, "f0_max", 400.0),
        frame_shift_s=frame_shift,
        window_s=_cfg_float(cfg, "window_s", 0.040),
        voicing_threshold=_cfg_float(cfg, "voicing_threshold", 0.45),
    )
    composite = CompositeConfig(
        w_f0=_cfg_float(cfg, "w_f0", 1.0),
        w_energy=_cfg_float(cfg, "w_energy", 0.5),
        w_dur=_cfg_float(cfg, "w_dur", 1.0),
        mode=cfg.get("composite_mode", "product"),
    )
    grid = ScaleGrid(
        n_scales=_cfg_int(cfg, "n_scales", 12),
        min_period_s=_cfg_float(cfg, "min_period_s", 0.1),
        scales_per_octave=_cfg_int(cfg, "scales_per_octave", 2),
    )
    thresholds = Thresholds(
        theta1=_cfg_float(cfg, "theta1", 0.5),
        theta2=_cfg_float(cfg, "theta2", 1.0),
    )
    return AnnotateConfig(
        pitch=pitch, composite=composite, grid=grid,
        frame_shift_s=frame_shift,
        energy_window_s=_cfg_float(cfg, "energy_window_s", 0.040),
        smooth_sigma_s=_cfg_float(cfg, "smooth_sigma_s", 0.02),
        dur_smooth_sigma_s=_cfg_float(cfg, "dur_smooth_sigma_s", 0.0),
        thresholds=thresholds, n_classes=n_classes,
    )


def _config_snapshot(cfg: AnnotateConfig) -> list[str]:
    p, c, g = cfg.pitch, cfg.composite, cfg.grid
    pairs = [
        ("f0_min", p.f0_min), ("f0_max", p.f0_max),
        ("voicing_threshold", p.voicing_threshold),
        ("window_s", p.window_s), ("frame_shift_s", cfg.frame_shift_s),
        ("energy_window_s", cfg.energy_window_s),
        ("smooth_sigma_s", cfg.smooth_sigma_s),
        ("dur_smooth_sigma_s", cfg.dur_smooth_sigma_s),
        ("w_f0", c.w_f0), ("w_energy", c.w_energy), ("w_dur", c.w_dur),
        ("composite_mode", c.mode),
        ("n_scales", g.n_scales), ("min_period_s", g.min_period_s),
        ("scales_per_octave", g.scales_per_octave),
        ("theta1", cfg.thresholds.theta1), ("theta2", cfg.thresholds.theta2),
        ("n_classes", cfg.n_classes),
    ]
    return [f"config.{k}={v}" for k, v in pairs]


# ---------------------------------------------------------------------------
# annotate
# ---------------------------------------------------------------------------

def _annotate_one(job) -> tuple[str, list[ProminenceRecord] | None, str | None]:
    stem, wav_path, align_path, tier, cfg = job
    try:
        audio = read_wav(wav_path)
        if align_path.suffix.lower() == ".lab":
            utt = parse_lab(align_path, utt_id=stem)
        else:
            utt = parse_textgrid(align_path, tier, utt_id=stem)
        return stem, annotate_utterance(audio, utt, cfg), None
    except Exception as exc:
        return stem, None, str(exc)


def cmd_annotate(args) -> int:
    cfg_dict = load_config(args.config)
    cfg = build_annotate_config(cfg_dict, args.classes)
    tier = cfg_dict.get("textgrid_tier", "words")
    align_dir = Path(args.align_dir)
    audio_dir = Path(args.audio_dir)

    aligns = sorted(
        [p for p in align_dir.iterdir()
         if p.suffix.lower() in (".lab", ".textgrid")],
        key=lambda p: p.stem,
    ) if align_dir.is_dir() else []
    if not aligns:
        raise CorpusFormatError(f"empty input set: no alignments in {align_dir}")

    jobs = []
    missing: list[str] = []
    for align_path in aligns:
        wav_path = audio_dir / (align_path.stem + ".wav")
        if wav_path.is_file():
            jobs.append((align_path.stem, wav_path, align_path, tier, cfg))
        else:
            missing.append(align_path.stem)

    log.info("annotating %d utterances with %d worker(s)", len(jobs),
             args.jobs)
    if args.jobs > 1 and jobs:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_annotate_one, jobs))
    else:
        results = [_annotate_one(job) for job in jobs]

    status: list[tuple[str, str]] = [(s, "failed: missing audio")
                                     for s in missing]
    payload = []
    for stem, records, err in results:
        if records is None:
            log.info("%s failed: %s", stem, err)
            status.append((stem, f"failed: {err}"))
            continue
        status.append((stem, "ok"))
        utt = Utterance(id=stem, speaker="",
                        tokens=[_token_stub(r.token) for r in records])
        payload.append((utt, records))

    out_path = Path(args.out_file)
    out_path.write_bytes(write_dataset(payload))

    status.sort(key=lambda s: s[0])
    n_ok = sum(1 for _, st in status if st == "ok")
    n_fail = len(status) - n_ok
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    manifest = [f"# generated {stamp}", "command=annotate"]
    manifest.extend(_config_snapshot(cfg))
    manifest.extend(f"utt\t{stem}\t{st}" for stem, st in status)
    manifest.append(f"summary\t{n_ok} ok, {n_fail} failed")
    Path(str(out_path) + ".manifest").write_text(
        "\n".join(manifest) + "\n", encoding="utf-8")
    print(f"{n_ok} ok, {n_fail} failed -> {out_path}")
    return 0


def _token_stub(text: str):
    from .corpus_io import Token
    return Token(text=text, start_s=0.0, end_s=0.0,
                 is_punct=is_punctuation(text))


# ---------------------------------------------------------------------------
# calibrate
# ---------------------------------------------------------------------------

def _read_floats(path: str) -> list[float]:
    values = []
    for lineno, line in enumerate(
            Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            values.append(float(line))
        except ValueError as exc:
            raise CorpusFormatError(
                f"{path} line {lineno}: not a number: {line!r}") from exc
    return values


def cmd_calibrate(args) -> int:
    cfg = load_config(args.config)
    values = _read_floats(args.values_file)
    if args.mode == "binary":
        reference = [int(v) for v in _read_floats(args.reference_file)]
        t = calibrate_binary(values, reference)
        print(f"theta1={t.theta1!r}")
    else:
        theta1 = args.theta1
        if theta1 is None:
            if "theta1" not in cfg:
                raise UsageError("split mode needs --theta1 or config theta1")
            theta1 = _cfg_float(cfg, "theta1", 0.5)
        theta2 = split_prominent(values, theta1)
        print(f"theta1={theta1!r}")
        print(f"theta2={theta2!r}")
    return 0


# ---------------------------------------------------------------------------
# train / predict / evaluate / learning-curve
# ---------------------------------------------------------------------------

def _load_sentences(path: str, n_classes: int) -> list[LabeledSentence]:
    sentences = [sentence_from_records(block)
                 for block in parse_dataset(Path(path))]
    if not sentences:
        raise CorpusFormatError(f"no sentences in {path}")
    if n_classes == 2:
        for sent in sentences:
            sent.labels = evaluation.merge_labels(sent.labels)
    return sentences


def _embed_table(cfg: dict[str, str]):
    if "embeddings" not in cfg:
        raise UsageError("embed model needs config keys embeddings=<path> "
                         "and embedding_dim=<n>")
    dim = _cfg_int(cfg, "embedding_dim", 0)
    if dim <= 0:
        raise UsageError("config key embedding_dim must be a positive integer")
    return load_embeddings(Path(cfg["embeddings"]), dim)


def cmd_train(args) -> int:
    cfg = load_config(args.config)
    corpus = _load_sentences(args.train_file, args.classes)
    log.info("training %s on %d sentences", args.model, len(corpus))
    if args.model == "majority":
        model = train_majority(corpus)
        print(f"entries={len(model.per_word)}")
    elif args.model == "crf":
        model = crf_train(
            corpus,
            l2_lambda=_cfg_float(cfg, "l2_lambda", 1e-4),
            max_iterations=_cfg_int(cfg, "max_iterations", 100),
            tolerance=_cfg_float(cfg, "tolerance", 1e-5),
        )
        value, _ = crf_loglik_grad(model, corpus)
        print(f"features={len(model.feature_index)}")
        print(f"objective={value:.6f}")
    else:
        model = train_embed_classifier(
            corpus, _embed_table(cfg),
            l2_lambda=_cfg_float(cfg, "l2_lambda", 1e-4),
            max_iterations=_cfg_int(cfg, "max_iterations", 500),
        )
        print(f"dimension={model.table.dimension}")
    Path(args.out_model).write_bytes(save_model(model))
    return 0


def _predictor(model, majority_mode: str):
    if isinstance(model, MajorityModel):
        return lambda tokens: predict_majority(model, tokens, majority_mode)
    if isinstance(model, CrfModel):
        return lambda tokens: viterbi(model, tokens)
    if isinstance(model, EmbeddingClassifier):
        return lambda tokens: predict_embed(model, tokens)
    raise UsageError(f"unsupported model object {type(model).__name__}")


def _model_name(model, majority_mode: str) -> str:
    if isinstance(model, MajorityModel):
        return ("majority-global" if majority_mode == "global"
                else "majority-per-word")
    return "crf" if isinstance(model, CrfModel) else "embed"


def _majority_mode(args) -> str:
    return "global" if args.model == "majority-global" else "per_word"


def _format_labels(labels) -> str:
    return "\n".join("NA" if lab is None else str(lab) for lab in labels)


def cmd_predict(args) -> int:
    model = load_model(Path(args.model_file).read_bytes())
    sentences = _load_sentences(args.in_file, 3)
    predict = _predictor(model, _majority_mode(args))
    blocks = []
    for sent in sentences:
        preds = predict(sent.tokens)
        if args.classes == 2:
            preds = evaluation.merge_labels(preds)
        lines = [
            f"{tok}\t{'NA' if lab is None else lab}"
            for tok, lab in zip(sent.tokens, preds)
        ]
        blocks.append("\n".join(lines))
    Path(args.out_file).write_text("\n\n".join(blocks) + "\n",
                                   encoding="utf-8")
    print(f"{len(sentences)} sentences -> {args.out_file}")
    return 0


def parse_predictions(path: str) -> list[LabeledSentence]:
    """Read the 2-column token<TAB>label format written by cmd_predict."""
    text = Path(path).read_text(encoding="utf-8")
    sentences = []
    tokens: list[str] = []
    labels: list[int | None] = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        if not line.strip():
            if tokens:
                sentences.append(LabeledSentence(tokens, labels))
                tokens, labels = [], []
            continue
        cols = line.split("\t")
        if len(cols) != 2:
            raise CorpusFormatError(
                f"line {lineno}: expected 2 columns, got {len(cols)}")
        tokens.append(cols[0])
        labels.append(None if cols[1] == "NA" else int(cols[1]))
    if tokens:
        sentences.append(LabeledSentence(tokens, labels))
    return sentences


def cmd_evaluate(args) -> int:
    gold_sents = _load_sentences(args.test_file, args.classes)
    head = Path(args.model_or_pred).read_bytes()[:64]
    is_model = head.startswith(b"prosolab-model")

    if is_model:
        model = load_model(Path(args.model_or_pred).read_bytes())
        predict = _predictor(model, _majority_mode(args))
        name = _model_name(model, _majority_mode(args))
        pred_lists = [predict(sent.tokens) for sent in gold_sents]
    else:
        pred_sents = parse_predictions(args.model_or_pred)
        if len(pred_sents) != len(gold_sents):
            raise CorpusFormatError(
                f"sentence count mismatch: {len(pred_sents)} predicted vs "
                f"{len(gold_sents)} gold")
        name = "predictions"
        pred_lists = [s.labels for s in pred_sents]

    preds: list[int | None] = []
    golds: list[int | None] = []
    for pred, sent in zip(pred_lists, gold_sents):
        if args.classes == 2:
            pred = evaluation.merge_labels(pred)
        preds.extend(pred)
        golds.extend(sent.labels)

    acc = evaluation.accuracy(preds, golds)
    conf = evaluation.confusion(preds, golds, args.classes)
    task = f"{args.classes}-way"
    print(evaluation.format_summary({name: {task: acc}}), end="")

    prefix = args.out
    Path(f"{prefix}.report.tsv").write_text(
        evaluation.report_tsv([(name, task, 1.0, acc)]), encoding="utf-8")
    Path(f"{prefix}.confusion.tsv").write_text(conf.to_tsv(), encoding="utf-8")
    return 0


def _parse_fractions(text: str) -> list[float]:
    out = []
    for part in text.split(","):
        part = part.strip()
        try:
            pct = float(part)
        except ValueError as exc:
            raise UsageError(f"bad fraction {part!r}") from exc
        frac = pct / 100.0
        if not any(abs(frac - f) < 1e-9 for f in evaluation.CURVE_FRACTIONS):
            allowed = ",".join(f"{100 * f:g}" for f in
                               evaluation.CURVE_FRACTIONS)
            raise UsageError(
                f"fraction {part}% not supported; pick from {allowed}")
        out.append(frac)
    if not out:
        raise UsageError("empty fraction list")
    return out


def cmd_learning_curve(args) -> int:
    cfg = load_config(args.config)
    train_corpus = _load_sentences(args.train_file, args.classes)
    test_corpus = _load_sentences(args.test_file, args.classes)
    fractions = _parse_fractions(args.fractions)

    if args.model in ("majority", "majority-global"):
        mode = _majority_mode(args)

        def train_fn(corpus):
            model = train_majority(corpus)
            return lambda tokens: predict_majority(model, tokens, mode)
    elif args.model == "crf":
        def train_fn(corpus):
            model = crf_train(
                corpus,
                l2_lambda=_cfg_float(cfg, "l2_lambda", 1e-4),
                max_iterations=_cfg_int(cfg, "max_iterations", 100),
                tolerance=_cfg_float(cfg, "tolerance", 1e-5),
            )
            return lambda tokens: viterbi(model, tokens)
    else:
        table = _embed_table(cfg)

        def train_fn(corpus):
            model = train_embed_classifier(corpus, table)
            return lambda tokens: predict_embed(model, tokens)

    points = evaluation.learning_curve(train_fn, train_corpus, test_corpus,
                                       fractions, args.seed)
    task = f"{args.classes}-way"
    Path(args.out_tsv).write_text(
        evaluation.curve_tsv(args.model, task, points), encoding="utf-8")
    for p in points:
        print(f"fraction {p.fraction:g}: accuracy {p.accuracy:.4f}")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prosolab",
        description="Word prominence annotation from audio and text-only "
                    "prominence taggers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, classes=True):
        p.add_argument("--config", default=None,
                       help="flat key=value config file")
        p.add_argument("--seed", type=int, default=0,
                       help="random seed (default 0)")
        if classes:
            p.add_argument("--classes", type=int, choices=(2, 3), default=3,
                           help="label granularity (default 3)")

    p = sub.add_parser("annotate",
                       help="annotate audio + alignments with prominence")
    p.add_argument("audio_dir")
    p.add_argument("align_dir")
    p.add_argument("out_file")
    p.add_argument("--jobs", type=int, default=1,
                   help="parallel workers (default 1)")
    common(p)
    p.set_defaults(func=cmd_annotate)

    p = sub.add_parser("calibrate", help="fit discretization thresholds")
    p.add_argument("values_file")
    p.add_argument("reference_file", nargs="?", default=None)
    p.add_argument("--mode", choices=("binary", "split"), default="binary")
    p.add_argument("--theta1", type=float, default=None)
    common(p, classes=False)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("train", help="train a text-only tagger")
    p.add_argument("train_file")
    p.add_argument("out_model")
    p.add_argument("--model", required=True,
                   choices=("majority", "crf", "embed"))
    common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="predict labels for a dataset file")
    p.add_argument("model_file")
    p.add_argument("in_file")
    p.add_argument("out_file")
    p.add_argument("--model", default="majority",
                   choices=("majority", "majority-global", "crf", "embed"),
                   help="majority decode mode selector (default per-word)")
    common(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="score a model or prediction file")
    p.add_argument("model_or_pred")
    p.add_argument("test_file")
    p.add_argument("--model", default="majority",
                   choices=("majority", "majority-global", "crf", "embed"),
                   help="majority decode mode selector (default per-word)")
    p.add_argument("--out", default="eval",
                   help="prefix for report/confusion TSVs (default 'eval')")
    common(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("learning-curve",
                       help="accuracy at growing training fractions")
    p.add_argument("train_file")
    p.add_argument("test_file")
    p.add_argument("out_tsv")
    p.add_argument("--model", required=True,
                   choices=("majority", "majority-global", "crf", "embed"))
    p.add_argument("--fractions", default="1,5,10,50,100",
                   help="percent list from {1,5,10,50,100}")
    common(p)
    p.set_defaults(func=cmd_learning_curve)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("PROSOLAB_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (CorpusFormatError, AnnotationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
