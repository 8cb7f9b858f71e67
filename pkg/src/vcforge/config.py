"""INI run configuration shared by the command-line tools.

Every key has a module default; a config file may override any of them and
command-line flags override the file. Unknown sections or keys are errors.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Optional

from .cyclegan.model import TrainConfig
from .cyclegan.networks import Architecture
from .dsp import features as _feat


def _int_tuple(text: str) -> tuple[int, ...]:
    return tuple(int(p) for p in text.replace(",", " ").split())


def _bool(text: str) -> bool:
    v = text.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@dataclass
class FeatureSettings:
    frame_len_ms: float = _feat.FRAME_LEN_MS
    hop_ms: float = _feat.HOP_MS
    n_fft: int = _feat.ANALYSIS_N_FFT

    def validate(self) -> None:
        if self.frame_len_ms <= 0 or self.hop_ms <= 0:
            raise ValueError("frame_len_ms and hop_ms must be positive")
        if self.n_fft < self.frame_len_ms * 16:  # 16 samples per ms at 16 kHz
            raise ValueError(f"n_fft {self.n_fft} is shorter than the analysis frame")


@dataclass
class NmfSettings:
    n_components: int = 100
    iterations: int = 500
    infer_iterations: int = 200

    def validate(self) -> None:
        if self.n_components < 1:
            raise ValueError("n_components must be positive")
        if self.iterations < 1 or self.infer_iterations < 1:
            raise ValueError("NMF iteration counts must be positive")


@dataclass
class RunConfig:
    features: FeatureSettings = field(default_factory=FeatureSettings)
    train: TrainConfig = field(default_factory=TrainConfig)
    arch: Architecture = field(default_factory=Architecture)
    nmf: NmfSettings = field(default_factory=NmfSettings)
    cache_dir: Optional[Path] = None
    seed: int = 0
    workers: int = 1

    def validate(self) -> None:
        self.features.validate()
        self.train.validate()
        self.nmf.validate()
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        if len(self.arch.down_channels) != 2 or len(self.arch.disc_channels) != 3:
            raise ValueError("down_channels needs 2 widths and disc_channels needs 3")
        if min(self.arch.down_channels + self.arch.disc_channels + (self.arch.base_channels,)) < 1:
            raise ValueError("channel widths must be positive")
        if self.arch.n_residual < 0:
            raise ValueError("n_residual must be >= 0")

    def with_seed(self, seed: Optional[int]) -> "RunConfig":
        if seed is None:
            return self
        return replace(self, seed=seed, train=replace(self.train, seed=seed))

    @property
    def feature_cache(self) -> Optional[Path]:
        env = os.environ.get("VCFORGE_CACHE_DIR")
        return Path(env) if env else self.cache_dir


# section -> key -> parser
_TRAIN_TYPES = {f.name: (float if f.type in ("float", float) else int) for f in fields(TrainConfig)}
_ARCH_TYPES = {
    "base_channels": int,
    "down_channels": _int_tuple,
    "n_residual": int,
    "disc_channels": _int_tuple,
    "input_skip": _bool,
}
SCHEMA: dict[str, dict[str, Any]] = {
    "features": {"frame_len_ms": float, "hop_ms": float, "n_fft": int},
    "cyclegan": {**_TRAIN_TYPES, **_ARCH_TYPES},
    "nmf": {"n_components": int, "iterations": int, "infer_iterations": int},
    "run": {"seed": int, "workers": int, "cache_dir": Path},
}


def load_config(path: Optional[str | os.PathLike] = None) -> RunConfig:
    """Parse an INI file into a validated :class:`RunConfig` (defaults if ``path`` is None)."""
    cfg = RunConfig()
    if path is None:
        return cfg
    parser = configparser.ConfigParser(interpolation=None)
    with open(path, encoding="utf-8") as fh:
        parser.read_file(fh)
    values: dict[str, dict[str, Any]] = {}
    for section in parser.sections():
        if section not in SCHEMA:
            raise ValueError(f"{path}: unknown section [{section}]")
        values[section] = {}
        for key, raw in parser.items(section):
            if key not in SCHEMA[section]:
                raise ValueError(f"{path}: unknown key {key!r} in [{section}]")
            try:
                values[section][key] = SCHEMA[section][key](raw)
            except ValueError as exc:
                raise ValueError(f"{path}: bad value for {section}.{key}: {exc}") from exc
    cyc = values.get("cyclegan", {})
    run = values.get("run", {})
    cfg = RunConfig(
        features=FeatureSettings(**values.get("features", {})),
        train=TrainConfig(**{k: v for k, v in cyc.items() if k in _TRAIN_TYPES}),
        arch=Architecture(**{k: v for k, v in cyc.items() if k in _ARCH_TYPES}),
        nmf=NmfSettings(**values.get("nmf", {})),
        cache_dir=run.get("cache_dir"),
        seed=run.get("seed", 0),
        workers=run.get("workers", 1),
    )
    if "seed" in run and "seed" not in cyc:
        cfg.train.seed = cfg.seed
    cfg.validate()
    return cfg
