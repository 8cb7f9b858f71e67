"""CycleGAN training loop, conversion, and the estimator front end."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .. import numerics as nx
from ..dsp.audio import Waveform
from ..dsp.features import FeatureSequence, extract_features
from ..dsp.normalize import NormStats, apply_norm, compute_norm_stats, invert_norm
from ..dsp.vocoder import synthesize
from ..numerics import Adam, Tensor
from .losses import cycle_consistency_loss, lsgan_losses, total_loss
from .networks import (
    Architecture,
    DiscriminatorParams,
    GeneratorParams,
    discriminator_forward,
    generator_forward,
)

logger = logging.getLogger(__name__)

LOSS_COLUMNS = ("iter", "loss_D_X", "loss_D_Y", "adv_G", "adv_F", "cyc", "total")


@dataclass
class TrainConfig:
    lambda_cyc: float = 10.0
    segment_len: int = 128
    batch_size: int = 1
    lr_generator: float = 0.0002
    lr_discriminator: float = 0.0001
    iterations: int = 2000
    seed: int = 0
    identity_loss_weight: float = 0.0
    beta1: float = 0.9
    beta2: float = 0.999
    adam_epsilon: float = 1e-8

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.lambda_cyc < 0:
            raise ValueError(f"lambda_cyc must be >= 0, got {self.lambda_cyc}")
        if self.segment_len < 16 or self.segment_len % 4:
            raise ValueError(f"segment_len must be a multiple of 4 and >= 16, got {self.segment_len}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.iterations < 1:
            raise ValueError(f"iterations must be positive, got {self.iterations}")
        if self.lr_generator <= 0 or self.lr_discriminator <= 0:
            raise ValueError("learning rates must be positive")
        if self.identity_loss_weight < 0:
            raise ValueError("identity_loss_weight must be >= 0")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class CycleGanModel:
    G: GeneratorParams
    F: GeneratorParams
    D_X: DiscriminatorParams
    D_Y: DiscriminatorParams
    source_stats: Optional[NormStats]
    target_stats: Optional[NormStats]
    config: TrainConfig = field(default_factory=TrainConfig)

    @property
    def arch(self) -> Architecture:
        return self.G.arch

    @classmethod
    def init(cls, config: TrainConfig, arch: Architecture | None = None) -> "CycleGanModel":
        arch = arch or Architecture()
        rng = nx.make_rng(config.seed)
        return cls(
            G=GeneratorParams.init("X_to_Y", arch, rng),
            F=GeneratorParams.init("Y_to_X", arch, rng),
            D_X=DiscriminatorParams.init("D_X", arch, rng),
            D_Y=DiscriminatorParams.init("D_Y", arch, rng),
            source_stats=None,
            target_stats=None,
            config=config,
        )


@dataclass
class LossRecord:
    iter: int
    loss_D_X: float
    loss_D_Y: float
    adv_G: float
    adv_F: float
    cyc: float
    total: float

    def as_row(self) -> list:
        return [getattr(self, c) for c in LOSS_COLUMNS]


def pad_to_length(m: np.ndarray, length: int) -> np.ndarray:
    """Reflect-pad a [D, T] matrix on the right until it has ``length`` frames."""
    while m.shape[1] < length:
        need = length - m.shape[1]
        mode = "reflect" if m.shape[1] > 1 else "edge"
        m = np.pad(m, ((0, 0), (0, min(need, max(1, m.shape[1] - 1)))), mode=mode)
    return m


class SegmentSampler:
    """Draws random fixed-length [D, segment_len] windows from a pool of utterances."""

    def __init__(self, matrices: Sequence[np.ndarray], segment_len: int, rng: np.random.Generator):
        if not matrices:
            raise ValueError("segment sampler needs at least one utterance")
        self.pool = [np.ascontiguousarray(pad_to_length(m, segment_len), dtype=np.float32) for m in matrices]
        self.segment_len = segment_len
        self.rng = rng

    def sample(self) -> tuple[np.ndarray, int, int]:
        i = int(self.rng.integers(len(self.pool)))
        m = self.pool[i]
        start = int(self.rng.integers(m.shape[1] - self.segment_len + 1))
        return m[:, start : start + self.segment_len], i, start


def _normalized(corpus: Sequence[FeatureSequence], stats: NormStats) -> list[np.ndarray]:
    return [apply_norm(f, stats).mel_cepstra.T for f in corpus]


def train_cyclegan(
    source_corpus: Sequence[FeatureSequence],
    target_corpus: Sequence[FeatureSequence],
    config: TrainConfig | None = None,
    arch: Architecture | None = None,
    callback: Callable[[LossRecord], None] | None = None,
) -> tuple[CycleGanModel, list[LossRecord]]:
    """Train both mappings on unpaired corpora; returns the model and per-iteration losses.

    Each iteration updates D_X and D_Y first (on detached fakes), then G and F
    on the joint objective.
    """
    config = config or TrainConfig()
    config.validate()
    if not source_corpus or not target_corpus:
        raise ValueError("both source and target corpora must be nonempty")
    model = CycleGanModel.init(config, arch)
    model.source_stats = compute_norm_stats(source_corpus)
    model.target_stats = compute_norm_stats(target_corpus)
    sample_x = SegmentSampler(_normalized(source_corpus, model.source_stats), config.segment_len, nx.make_rng(config.seed, 1))
    sample_y = SegmentSampler(_normalized(target_corpus, model.target_stats), config.segment_len, nx.make_rng(config.seed, 2))

    betas = (config.beta1, config.beta2)
    opt = {
        "G": Adam(model.G.params, config.lr_generator, betas, config.adam_epsilon),
        "F": Adam(model.F.params, config.lr_generator, betas, config.adam_epsilon),
        "D_X": Adam(model.D_X.params, config.lr_discriminator, betas, config.adam_epsilon),
        "D_Y": Adam(model.D_Y.params, config.lr_discriminator, betas, config.adam_epsilon),
    }
    log: list[LossRecord] = []
    lam = config.lambda_cyc
    b = config.batch_size
    for it in range(1, config.iterations + 1):
        batch = [(Tensor(sample_x.sample()[0]), Tensor(sample_y.sample()[0])) for _ in range(b)]

        # discriminators
        for o in opt.values():
            o.zero_grad()
        d_x_total = d_y_total = 0.0
        for x, y in batch:
            fake_y = generator_forward(model.G, x).detach()
            fake_x = generator_forward(model.F, y).detach()
            loss_dy, _ = lsgan_losses(discriminator_forward(model.D_Y, y), discriminator_forward(model.D_Y, fake_y))
            loss_dx, _ = lsgan_losses(discriminator_forward(model.D_X, x), discriminator_forward(model.D_X, fake_x))
            ((loss_dx + loss_dy) * (1.0 / b)).backward()
            d_x_total += loss_dx.item() / b
            d_y_total += loss_dy.item() / b
        opt["D_X"].step()
        opt["D_Y"].step()

        # generators
        for o in opt.values():
            o.zero_grad()
        adv_g_total = adv_f_total = cyc_total = 0.0
        for x, y in batch:
            gx = generator_forward(model.G, x)
            fy = generator_forward(model.F, y)
            # generator side of the least-squares loss only needs the fake scores
            adv_g = nx.mean(nx.square(discriminator_forward(model.D_Y, gx) - 1.0))
            adv_f = nx.mean(nx.square(discriminator_forward(model.D_X, fy) - 1.0))
            cyc = cycle_consistency_loss(x, generator_forward(model.F, gx), y, generator_forward(model.G, fy))
            objective = total_loss(adv_g, adv_f, cyc, lam)
            if config.identity_loss_weight > 0:
                ident = nx.mean(nx.abs(generator_forward(model.G, y) - y)) + nx.mean(nx.abs(generator_forward(model.F, x) - x))
                objective = objective + ident * config.identity_loss_weight
            (objective * (1.0 / b)).backward()
            adv_g_total += adv_g.item() / b
            adv_f_total += adv_f.item() / b
            cyc_total += cyc.item() / b
        opt["G"].step()
        opt["F"].step()
        for o in opt.values():
            o.zero_grad()

        rec = LossRecord(it, d_x_total, d_y_total, adv_g_total, adv_f_total, cyc_total,
                         float(total_loss(adv_g_total, adv_f_total, cyc_total, lam)))
        if not all(np.isfinite(v) for v in rec.as_row()):
            raise FloatingPointError(f"non-finite loss at iteration {it}: {rec}")
        log.append(rec)
        if callback is not None:
            callback(rec)
        if it % 100 == 0:
            logger.info("iter %d: D_X %.4f D_Y %.4f adv_G %.4f adv_F %.4f cyc %.4f total %.4f", *rec.as_row())
    return model, log


def convert_features(model: CycleGanModel, f: FeatureSequence, generator: Callable | None = None) -> FeatureSequence:
    """Map source-domain features to the target domain; F0 passes through unchanged."""
    if model.source_stats is None or model.target_stats is None:
        raise ValueError("model has no normalization statistics; train or load it first")
    if f.n_frames == 0:
        raise ValueError("cannot convert an utterance with no frames")
    x = apply_norm(f, model.source_stats).mel_cepstra.T.astype(np.float32)
    if generator is None:
        y = generator_forward(model.G, Tensor(x)).data
    else:
        y = np.asarray(generator(x), dtype=np.float32)
    return invert_norm(f.with_cepstra(y.T.astype(np.float64)), model.target_stats)


def convert_utterance(model: CycleGanModel, w: Waveform, generator: Callable | None = None) -> Waveform:
    """Extract features, convert with G, and resynthesize with the source F0.

    ``generator`` optionally replaces G with any [24, T] -> [24, T] map on
    normalized features (used for pipeline sanity checks).
    """
    if len(w) == 0:
        raise ValueError("cannot convert empty audio")
    try:
        f = extract_features(w)
    except ValueError as exc:
        raise ValueError(f"audio too short to convert: {exc}") from exc
    return synthesize(convert_features(model, f, generator), w.sample_rate)


class CycleGANConverter(BaseEstimator):
    """Non-parallel feature mapper from a source domain X to a target domain Y.

    ``fit(X, y)`` takes two *unpaired* lists of :class:`FeatureSequence`:
    ``X`` from the source domain and ``y`` from the target domain.
    """

    def __init__(
        self,
        lambda_cyc: float = 10.0,
        segment_len: int = 128,
        batch_size: int = 1,
        lr_generator: float = 0.0002,
        lr_discriminator: float = 0.0001,
        iterations: int = 2000,
        seed: int = 0,
        identity_loss_weight: float = 0.0,
        base_channels: int = 64,
        down_channels: tuple = (64, 128),
        n_residual: int = 3,
        disc_channels: tuple = (64, 128, 256),
    ):
        self.lambda_cyc = lambda_cyc
        self.segment_len = segment_len
        self.batch_size = batch_size
        self.lr_generator = lr_generator
        self.lr_discriminator = lr_discriminator
        self.iterations = iterations
        self.seed = seed
        self.identity_loss_weight = identity_loss_weight
        self.base_channels = base_channels
        self.down_channels = down_channels
        self.n_residual = n_residual
        self.disc_channels = disc_channels

    def _config(self) -> TrainConfig:
        return TrainConfig(
            lambda_cyc=self.lambda_cyc,
            segment_len=self.segment_len,
            batch_size=self.batch_size,
            lr_generator=self.lr_generator,
            lr_discriminator=self.lr_discriminator,
            iterations=self.iterations,
            seed=self.seed,
            identity_loss_weight=self.identity_loss_weight,
        )

    def _arch(self) -> Architecture:
        return Architecture(
            base_channels=self.base_channels,
            down_channels=tuple(self.down_channels),
            n_residual=self.n_residual,
            disc_channels=tuple(self.disc_channels),
        )

    def fit(self, X: Sequence[FeatureSequence], y: Sequence[FeatureSequence]):
        self.model_, self.loss_log_ = train_cyclegan(list(X), list(y), self._config(), self._arch())
        return self

    @classmethod
    def from_model(cls, model: CycleGanModel) -> "CycleGANConverter":
        c, a = model.config, model.arch
        est = cls(
            lambda_cyc=c.lambda_cyc, segment_len=c.segment_len, batch_size=c.batch_size,
            lr_generator=c.lr_generator, lr_discriminator=c.lr_discriminator, iterations=c.iterations,
            seed=c.seed, identity_loss_weight=c.identity_loss_weight, base_channels=a.base_channels,
            down_channels=a.down_channels, n_residual=a.n_residual, disc_channels=a.disc_channels,
        )
        est.model_ = model
        est.loss_log_ = []
        return est

    def transform(self, X: Sequence[FeatureSequence]) -> list[FeatureSequence]:
        check_is_fitted(self, "model_")
        return [convert_features(self.model_, f) for f in X]

    def convert(self, w: Waveform) -> Waveform:
        check_is_fitted(self, "model_")
        return convert_utterance(self.model_, w)
