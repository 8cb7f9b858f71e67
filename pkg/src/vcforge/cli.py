"""``vcforge`` command-line front end."""

from __future__ import annotations

import argparse
import csv
import hashlib
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from . import toy
from .config import RunConfig, load_config
from .corpus import ManifestRow, read_manifest
from .cyclegan.checkpoint import MAGIC as CHECKPOINT_MAGIC
from .cyclegan.checkpoint import load_checkpoint, save_checkpoint
from .cyclegan.model import LOSS_COLUMNS, convert_features, train_cyclegan
from .dsp.audio import Waveform, load_wav, save_wav
from .dsp.features import FeatureSequence, extract_features, load_features, save_features
from .dsp.spectral import stft
from .dsp.vocoder import synthesize
from .eval.asr import ExternalAsr, MockAsr
from .eval.report import SystemSpec, evaluate_corpus, render_table, write_details
from .nmf.convert import convert_nmf, stack_aligned
from .nmf.factorization import DICT_MAGIC, learn_joint_dictionaries, load_dictionary, save_dictionary

logger = logging.getLogger("vcforge")

DB_FLOOR = -80.0


class CommandError(Exception):
    """A user-facing failure; the message is printed and the exit status is 1."""


def _map(fn: Callable, items: Sequence, workers: int) -> list:
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _manifest(path) -> list[ManifestRow]:
    try:
        rows = read_manifest(path)
    except OSError as exc:
        raise CommandError(f"cannot read manifest {path}: {exc}") from exc
    if not rows:
        raise CommandError(f"manifest {path} lists no utterances")
    return rows


def _quantized(f: FeatureSequence) -> FeatureSequence:
    # features always pass through cache precision so cached and fresh runs agree bit for bit
    return FeatureSequence(
        f.mel_cepstra.astype(np.float32), f.f0.astype(np.float32), f.frame_hop_ms, f.frame_len_ms
    )


def _extract(cfg: RunConfig, w: Waveform) -> FeatureSequence:
    fs = cfg.features
    return _quantized(extract_features(w, fs.frame_len_ms, fs.hop_ms, fs.n_fft))


def _cached_features(cfg: RunConfig, audio_path: Path) -> FeatureSequence:
    cache = cfg.feature_cache
    if cache is None:
        return _extract(cfg, load_wav(audio_path))
    fs = cfg.features
    h = hashlib.sha256(Path(audio_path).read_bytes())
    h.update(f"{fs.frame_len_ms}:{fs.hop_ms}:{fs.n_fft}".encode())
    entry = Path(cache) / f"{h.hexdigest()[:32]}.vcf"
    if entry.exists():
        try:
            return load_features(entry, fs.hop_ms, fs.frame_len_ms)
        except ValueError:
            logger.warning("ignoring unreadable cache entry %s", entry)
    f = _extract(cfg, load_wav(audio_path))
    entry.parent.mkdir(parents=True, exist_ok=True)
    tmp = entry.with_suffix(f".{os.getpid()}.tmp")
    save_features(tmp, f)
    os.replace(tmp, entry)
    return f


def _corpus_features(cfg: RunConfig, rows: Sequence[ManifestRow]) -> list[FeatureSequence]:
    def one(row):
        try:
            return _cached_features(cfg, row.audio_path)
        except (OSError, ValueError) as exc:
            raise CommandError(f"{row.utterance_id}: {exc}") from exc

    return _map(one, rows, cfg.workers)


# -- commands ---------------------------------------------------------------


def cmd_extract(args, cfg: RunConfig) -> int:
    rows = _manifest(args.manifest)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    def one(row: ManifestRow) -> Optional[str]:
        try:
            save_features(out / f"{row.utterance_id}.vcf", _extract(cfg, load_wav(row.audio_path)))
        except (OSError, ValueError) as exc:
            return f"{row.utterance_id}: {exc}"
        return None

    failures = [e for e in _map(one, rows, cfg.workers) if e]
    for e in failures:
        print(f"error: {e}", file=sys.stderr)
    print(f"extracted {len(rows) - len(failures)} of {len(rows)} utterances to {out}")
    return 1 if failures else 0


def cmd_train_cyclegan(args, cfg: RunConfig) -> int:
    train = cfg.train
    if args.iterations is not None:
        train = replace(train, iterations=args.iterations)
    train.validate()
    source = _corpus_features(cfg, _manifest(args.source))
    target = _corpus_features(cfg, _manifest(args.target))
    model, log = train_cyclegan(source, target, train, cfg.arch)
    out = Path(args.checkpoint)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_checkpoint(model, out)
    log_path = Path(args.loss_log) if args.loss_log else out.with_suffix(".losses.csv")
    with open(log_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LOSS_COLUMNS)
        for rec in log:
            w.writerow([rec.iter] + [repr(float(v)) for v in rec.as_row()[1:]])
    print(f"wrote {out} and {log_path} ({len(log)} iterations)")
    return 0


def _paired(source: list[ManifestRow], target: list[ManifestRow]) -> list[tuple[ManifestRow, ManifestRow]]:
    by_id = {r.utterance_id: r for r in target}
    src_ids = {r.utterance_id for r in source}
    unpaired = sorted(src_ids.symmetric_difference(by_id))
    if unpaired:
        raise CommandError(f"utterances without a partner in the other manifest: {', '.join(unpaired)}")
    return [(r, by_id[r.utterance_id]) for r in sorted(source, key=lambda r: r.utterance_id)]


def cmd_train_nmf(args, cfg: RunConfig) -> int:
    pairs = _paired(_manifest(args.source), _manifest(args.target))
    nmf = cfg.nmf
    k = args.components if args.components is not None else nmf.n_components
    iters = args.iterations if args.iterations is not None else nmf.iterations
    try:
        waves = [(load_wav(s.audio_path), load_wav(t.audio_path)) for s, t in pairs]
    except (OSError, ValueError) as exc:
        raise CommandError(str(exc)) from exc
    S, Tg = stack_aligned(waves)
    d, _, objective = learn_joint_dictionaries(S, Tg, k, iters, cfg.seed, return_objective=True)
    out = Path(args.dictionary)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_dictionary(out, d)
    log_path = Path(args.objective_log) if args.objective_log else out.with_suffix(".objective.csv")
    with open(log_path, "w", encoding="utf-8") as fh:
        fh.write("iter,objective\n")
        for i, v in enumerate(objective):
            fh.write(f"{i},{v!r}\n")
    print(f"wrote {out} ({S.shape[1]} aligned frames, K={k}) and {log_path}")
    return 0


def _artifact_kind(path: Path) -> str:
    try:
        with open(path, "rb") as fh:
            magic = fh.read(4)
    except OSError as exc:
        raise CommandError(f"cannot read {path}: {exc}") from exc
    if magic == CHECKPOINT_MAGIC:
        return "cyclegan"
    if magic == DICT_MAGIC:
        return "nmf"
    raise CommandError(f"{path} is neither a CycleGAN checkpoint nor an NMF dictionary")


def cmd_convert(args, cfg: RunConfig) -> int:
    artifact = Path(args.artifact)
    kind = _artifact_kind(artifact)
    if kind != args.method:
        raise CommandError(f"--method {args.method} given but {artifact} is a {kind} artifact")
    src = Path(args.input)
    if src.suffix.lower() == ".csv":
        jobs = [(r.audio_path, r.utterance_id) for r in _manifest(src)]
    else:
        jobs = [(src, src.stem)]
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    if kind == "cyclegan":
        model = load_checkpoint(artifact)

        def convert(w: Waveform) -> Waveform:
            return synthesize(convert_features(model, _extract(cfg, w)), w.sample_rate)
    else:
        d = load_dictionary(artifact)

        def convert(w: Waveform) -> Waveform:
            return convert_nmf(d, w, cfg.nmf.infer_iterations, cfg.seed)

    def one(job) -> Optional[str]:
        path, name = job
        try:
            save_wav(out / f"{name}.wav", convert(load_wav(path)))
        except (OSError, ValueError) as exc:
            return f"{name}: {exc}"
        return None

    failures = [e for e in _map(one, jobs, cfg.workers) if e]
    for e in failures:
        print(f"error: {e}", file=sys.stderr)
    print(f"converted {len(jobs) - len(failures)} of {len(jobs)} files into {out}")
    return 1 if failures else 0


def _asr(spec: str):
    kind, _, rest = spec.partition(":")
    if not rest:
        raise CommandError(f"--asr expects mock:FILE, external:COMMAND or http:URL, got {spec!r}")
    if kind == "mock":
        return MockAsr.from_json(rest)
    if kind == "external":
        return ExternalAsr(command=rest)
    if kind in ("http", "https"):
        return ExternalAsr(url=spec)
    raise CommandError(f"unknown recognizer kind {kind!r}")


def cmd_evaluate(args, cfg: RunConfig) -> int:
    rows = _manifest(args.manifest)
    systems = []
    for s in args.system:
        name, sep, directory = s.partition("=")
        if not sep or not name:
            raise CommandError(f"--system expects NAME=DIR, got {s!r}")
        systems.append(SystemSpec(name, Path(directory)))
    if len({s.name for s in systems}) != len(systems):
        raise CommandError("system names must be unique")
    report = evaluate_corpus(rows, systems, _asr(args.asr), args.asr_name, cfg.workers)
    print(render_table(report))
    details = Path(args.details) if args.details else Path("eval_details.jsonl")
    write_details(report, details)
    for d in report.details:
        if d.error:
            print(f"error: {d.system}/{d.id}: {d.error}", file=sys.stderr)
    return 1 if report.incomplete_systems else 0


def cmd_gen_toy(args, cfg: RunConfig) -> int:
    if args.n < 2:
        raise CommandError(f"--n must be at least 2, got {args.n}")
    seed = args.seed if args.seed is not None else 7
    paths = toy.write_corpus(args.out_dir, args.n, seed, args.train_fraction)
    print(f"wrote {args.n} parallel utterances (seed {seed}) to {args.out_dir}: {paths['source'].name}, {paths['target'].name}")
    return 0


def spectrogram_db(w: Waveform) -> np.ndarray:
    """[T, 513] log magnitudes in dB (20 ms / 10 ms framing), floored at -80 dB."""
    mag = stft(w, 20.0, 10.0, 1024).frames
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(mag)
    return np.maximum(db, DB_FLOOR)


def cmd_spectrogram(args, cfg: RunConfig) -> int:
    db = spectrogram_db(load_wav(args.input))
    with open(args.output, "w", encoding="utf-8") as fh:
        for row in db:
            fh.write(",".join(f"{v:.4f}" for v in row) + "\n")
    print(f"wrote {db.shape[0]} x {db.shape[1]} matrix to {args.output}")
    return 0


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vcforge", description="Voice conversion toolkit: CycleGAN and NMF pipelines.")
    p.add_argument("--config", help="INI file overriding module defaults")
    p.add_argument("--seed", type=int, help="global random seed (overrides the config file)")
    p.add_argument("--workers", type=int, help="parallel workers for per-utterance work")
    p.add_argument("--verbose", "-v", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("extract", help="compute mel-cepstral feature caches for a manifest")
    s.add_argument("manifest")
    s.add_argument("out_dir")
    s.set_defaults(func=cmd_extract)

    s = sub.add_parser("train-cyclegan", help="train the CycleGAN mapping on unpaired corpora")
    s.add_argument("source", help="source-domain manifest")
    s.add_argument("target", help="target-domain manifest")
    s.add_argument("checkpoint", help="output checkpoint path")
    s.add_argument("--iterations", type=int)
    s.add_argument("--loss-log", help="loss CSV path (default: CHECKPOINT with .losses.csv)")
    s.set_defaults(func=cmd_train_cyclegan)

    s = sub.add_parser("train-nmf", help="learn coupled NMF dictionaries from paired corpora")
    s.add_argument("source", help="source-domain manifest")
    s.add_argument("target", help="target-domain manifest, paired with the source by utterance id")
    s.add_argument("dictionary", help="output dictionary path")
    s.add_argument("--components", type=int)
    s.add_argument("--iterations", type=int)
    s.add_argument("--objective-log", help="objective CSV path (default: DICTIONARY with .objective.csv)")
    s.set_defaults(func=cmd_train_nmf)

    s = sub.add_parser("convert", help="convert a WAV file or every file of a manifest")
    s.add_argument("artifact", help="CycleGAN checkpoint or NMF dictionary")
    s.add_argument("input", help="WAV file or manifest CSV")
    s.add_argument("out_dir")
    s.add_argument("--method", choices=("cyclegan", "nmf"), required=True)
    s.set_defaults(func=cmd_convert)

    s = sub.add_parser("evaluate", help="WER / intelligibility table over several speech conditions")
    s.add_argument("manifest", help="reference manifest (ids and transcripts)")
    s.add_argument("--system", action="append", required=True, metavar="NAME=DIR",
                   help="condition name and directory holding <utterance_id>.wav; repeatable")
    s.add_argument("--asr", required=True, help="mock:TABLE.json | external:COMMAND | http(s)://URL")
    s.add_argument("--asr-name", default="ASR", help="row label in the table")
    s.add_argument("--details", help="JSON-lines detail output (default eval_details.jsonl)")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("gen-toy", help="write the synthetic parallel corpus")
    s.add_argument("out_dir")
    s.add_argument("--n", type=int, default=20, help="utterances per domain")
    s.add_argument("--train-fraction", type=float, default=0.75)
    s.set_defaults(func=cmd_gen_toy)

    s = sub.add_parser("spectrogram", help="export a dB spectrogram matrix as CSV")
    s.add_argument("input")
    s.add_argument("output")
    s.set_defaults(func=cmd_spectrogram)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        cfg = cfg.with_seed(args.seed)
        if args.workers is not None:
            cfg = replace(cfg, workers=args.workers)
        cfg.validate()
        return args.func(args, cfg)
    except CommandError as exc:
        print(f"error: {exc}", file=sys.stderr)
    except (OSError, ValueError, FloatingPointError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
    return 1


if __name__ == "__main__":
    sys.exit(main())
