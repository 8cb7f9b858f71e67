"""CycleGAN mapping between source and target mel-cepstral domains."""

from .checkpoint import CheckpointError, dumps, load_checkpoint, loads, save_checkpoint
from .losses import cycle_consistency_loss, lsgan_losses, total_loss
from .model import (
    LOSS_COLUMNS,
    CycleGANConverter,
    CycleGanModel,
    LossRecord,
    SegmentSampler,
    TrainConfig,
    convert_features,
    convert_utterance,
    pad_to_length,
    train_cyclegan,
)
from .networks import (
    Architecture,
    Direction,
    DiscriminatorParams,
    GeneratorParams,
    Side,
    discriminator_forward,
    generator_forward,
)

__all__ = [
    "Architecture",
    "CheckpointError",
    "CycleGANConverter",
    "CycleGanModel",
    "Direction",
    "DiscriminatorParams",
    "GeneratorParams",
    "LOSS_COLUMNS",
    "LossRecord",
    "SegmentSampler",
    "Side",
    "TrainConfig",
    "convert_features",
    "convert_utterance",
    "cycle_consistency_loss",
    "discriminator_forward",
    "dumps",
    "generator_forward",
    "load_checkpoint",
    "loads",
    "lsgan_losses",
    "pad_to_length",
    "save_checkpoint",
    "total_loss",
    "train_cyclegan",
]
