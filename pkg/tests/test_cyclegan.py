import hashlib

import numpy as np
import pytest

from vcforge import numerics as nx
from vcforge.cyclegan import (
    Architecture,
    CheckpointError,
    CycleGANConverter,
    CycleGanModel,
    DiscriminatorParams,
    GeneratorParams,
    SegmentSampler,
    TrainConfig,
    convert_features,
    convert_utterance,
    cycle_consistency_loss,
    discriminator_forward,
    dumps,
    generator_forward,
    loads,
    lsgan_losses,
    pad_to_length,
    total_loss,
    train_cyclegan,
)
from vcforge.dsp import FeatureSequence, Waveform, extract_features, interior_voiced, log_spectral_distortion
from vcforge.numerics import Tensor, make_rng
from vcforge import toy

SMALL = Architecture(base_channels=8, down_channels=(8, 16), n_residual=1, disc_channels=(8, 16, 16))


def const(value, shape=(1, 16)):
    return Tensor(np.full(shape, value), dtype=np.float64)


def fake_corpus(seed, n=3, shift=0.0):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        t = int(rng.integers(60, 200))
        m = rng.normal(shift, 1.0, (t, 24)).cumsum(axis=0) * 0.1
        out.append(FeatureSequence(m, np.where(rng.random(t) < 0.5, 0.0, 120.0)))
    return out


# -- losses ------------------------------------------------------------------------


def test_lsgan_exact_targets():
    loss_d, loss_g = lsgan_losses(const(1.0), const(0.0))
    assert loss_d.item() == 0.0
    assert lsgan_losses(const(0.3), const(1.0))[1].item() == 0.0


def test_lsgan_half_scores():
    loss_d, loss_g = lsgan_losses(const(0.5), const(0.5))
    assert abs(loss_d.item() - 0.5) <= 1e-6
    assert abs(loss_g.item() - 0.25) <= 1e-6


def test_cycle_loss_examples():
    x = Tensor(np.random.default_rng(0).normal(size=(24, 8)), dtype=np.float64)
    y = Tensor(np.random.default_rng(1).normal(size=(24, 8)), dtype=np.float64)
    assert cycle_consistency_loss(x, x, y, y).item() == 0.0
    assert abs(cycle_consistency_loss(x, x + 1.0, y, y).item() - 1.0) <= 1e-6
    gx = x + 0.3
    fy = y - 0.7
    a = cycle_consistency_loss(x, gx, y, fy).item()
    b = cycle_consistency_loss(y, fy, x, gx).item()
    assert abs(a - b) <= 1e-12


def test_cycle_loss_shape_mismatch():
    with pytest.raises(ValueError):
        cycle_consistency_loss(const(0.0, (24, 8)), const(0.0, (24, 4)), const(0.0, (24, 8)), const(0.0, (24, 8)))


def test_total_loss_examples():
    assert abs(total_loss(0.5, 0.5, 0.2, 10.0) - 3.0) <= 1e-6
    assert total_loss(0.5, 0.25, 7.0, 0.0) == 0.75
    assert abs(total_loss(0.5, 0.5, 0.2) - 3.0) <= 1e-6
    with pytest.raises(ValueError):
        total_loss(0.1, 0.1, 0.1, -1.0)


def test_train_config_defaults_and_validation():
    c = TrainConfig()
    assert (c.lambda_cyc, c.segment_len, c.batch_size, c.lr_generator, c.lr_discriminator) == (10.0, 128, 1, 2e-4, 1e-4)
    with pytest.raises(ValueError):
        TrainConfig(segment_len=130)
    with pytest.raises(ValueError):
        TrainConfig(lambda_cyc=-0.1)


# -- networks ----------------------------------------------------------------------


@pytest.fixture(scope="module")
def nets():
    rng = make_rng(0)
    arch = Architecture()
    return GeneratorParams.init("X_to_Y", arch, rng), GeneratorParams.init("Y_to_X", arch, rng), DiscriminatorParams.init("D_X", arch, rng)


def test_generator_preserves_shape(nets):
    g, _, _ = nets
    x = Tensor(np.random.default_rng(0).normal(size=(24, 128)))
    assert generator_forward(g, x).shape == (24, 128)
    # lengths not divisible by 4 are padded and cropped back
    assert generator_forward(g, Tensor(np.zeros((24, 53)))).shape == (24, 53)


def test_generator_directions_have_equal_parameter_counts(nets):
    g, f, _ = nets
    assert sum(p.size for p in g.params.values()) == sum(p.size for p in f.params.values())


def test_generator_is_deterministic():
    x = Tensor(np.random.default_rng(0).normal(size=(24, 64)))
    a = generator_forward(GeneratorParams.init("X_to_Y", SMALL, make_rng(3)), x).data
    b = generator_forward(GeneratorParams.init("X_to_Y", SMALL, make_rng(3)), x).data
    assert np.array_equal(a, b)


def test_generator_rejects_wrong_channels(nets):
    with pytest.raises(ValueError):
        generator_forward(nets[0], Tensor(np.zeros((20, 32))))


def test_generator_fuzz_is_finite(nets):
    g = nets[0]
    rng = np.random.default_rng(5)
    for _ in range(100):
        x = Tensor(rng.normal(0, rng.uniform(0.1, 10), size=(24, int(rng.integers(4, 40)) * 4)))
        assert np.all(np.isfinite(generator_forward(g, x).data))


def test_discriminator_patch_shape_and_min_length(nets):
    d = nets[2]
    assert discriminator_forward(d, Tensor(np.zeros((24, 128)))).shape == (1, 16)
    with pytest.raises(ValueError):
        discriminator_forward(d, Tensor(np.zeros((24, 8))))


def test_discriminator_is_deterministic_and_passes_gradient(nets):
    d = nets[2]
    x = Tensor(np.random.default_rng(2).normal(size=(24, 64)), requires_grad=True)
    a = discriminator_forward(d, x)
    assert np.array_equal(a.data, discriminator_forward(d, x).data)
    nx.mean(a).backward()
    assert np.any(x.grad != 0)
    for p in d.params.values():
        p.grad = None


# -- sampler -----------------------------------------------------------------------


def test_pad_to_length_reflects():
    m = np.arange(10, dtype=float).reshape(1, 10)
    p = pad_to_length(m, 25)
    assert p.shape == (1, 25)
    assert np.array_equal(p[0, :10], m[0]) and p[0, 10] == 8.0


def test_segment_sampler_windows_inside_padded_utterances():
    mats = [np.random.default_rng(i).normal(size=(24, t)) for i, t in enumerate([50, 128, 300])]
    s = SegmentSampler(mats, 128, make_rng(0))
    for _ in range(200):
        seg, i, start = s.sample()
        assert seg.shape == (24, 128)
        assert 0 <= start and start + 128 <= s.pool[i].shape[1]
        assert np.array_equal(seg, s.pool[i][:, start : start + 128])


# -- training ----------------------------------------------------------------------


def _param_hash(params):
    h = hashlib.sha256()
    for p in params.values():
        h.update(p.data.tobytes())
    return h.hexdigest()


def test_training_log_bookkeeping_and_determinism():
    src, tgt = fake_corpus(0), fake_corpus(1, shift=0.5)
    cfg = TrainConfig(iterations=4, seed=3, segment_len=64)
    m1, log1 = train_cyclegan(src, tgt, cfg, SMALL)
    m2, log2 = train_cyclegan(src, tgt, cfg, SMALL)
    assert [r.as_row() for r in log1] == [r.as_row() for r in log2]
    assert dumps(m1) == dumps(m2)
    for r in log1:
        assert abs(r.total - (r.adv_G + r.adv_F + 10.0 * r.cyc)) <= 1e-6
        assert all(np.isfinite(r.as_row()))
        assert r.loss_D_X >= 0 and r.loss_D_Y >= 0


def test_players_update_only_their_own_parameters(monkeypatch):
    src, tgt = fake_corpus(0), fake_corpus(1)
    original = nx.Adam.step
    holder = {}
    seen = []

    def record_step(self):
        model = holder["model"]
        groups = [model.G.params, model.F.params, model.D_X.params, model.D_Y.params]
        before = [_param_hash(g) for g in groups]
        original(self)
        after = [_param_hash(g) for g in groups]
        changed = [i for i in range(4) if before[i] != after[i]]
        mine = {id(t) for t in self.params.values()}
        assert all({id(t) for t in groups[i].values()} == mine for i in changed)
        seen.append(changed)

    real_init = CycleGanModel.init

    def init_and_remember(config, arch=None):
        holder["model"] = real_init(config, arch)
        return holder["model"]

    monkeypatch.setattr(CycleGanModel, "init", staticmethod(init_and_remember))
    monkeypatch.setattr(nx.Adam, "step", record_step)
    train_cyclegan(src, tgt, TrainConfig(iterations=2, segment_len=64), SMALL)
    # D_X, D_Y, then G, F; each step touches exactly its own network
    assert seen == [[2], [3], [0], [1]] * 2


def test_lsgan_fixed_point_for_generator():
    d = DiscriminatorParams.init("D_Y", SMALL, make_rng(0))
    # a discriminator whose output layer ignores its input and emits 1
    d.params["out.weight"].data[:] = 0.0
    d.params["out.bias"].data[:] = 1.0
    g = GeneratorParams.init("X_to_Y", SMALL, make_rng(1))
    x = Tensor(np.random.default_rng(0).normal(size=(24, 64)))
    _, adv = lsgan_losses(discriminator_forward(d, x), discriminator_forward(d, generator_forward(g, x)))
    assert adv.item() == 0.0
    assert total_loss(adv.item(), adv.item(), 5.0, 0.0) == 0.0


def test_training_rejects_empty_corpus():
    with pytest.raises(ValueError):
        train_cyclegan([], fake_corpus(0), TrainConfig(iterations=1), SMALL)


def test_identity_loss_flag_changes_training():
    src, tgt = fake_corpus(0), fake_corpus(1)
    _, a = train_cyclegan(src, tgt, TrainConfig(iterations=2, segment_len=64), SMALL)
    _, b = train_cyclegan(src, tgt, TrainConfig(iterations=2, segment_len=64, identity_loss_weight=5.0), SMALL)
    assert a[0].as_row() == b[0].as_row()
    assert a[1].as_row() != b[1].as_row()


# -- conversion and persistence ----------------------------------------------------------


@pytest.fixture(scope="module")
def trained():
    model, _ = train_cyclegan(fake_corpus(0), fake_corpus(1, shift=1.0), TrainConfig(iterations=2, segment_len=64), SMALL)
    return model


def test_convert_features_keeps_f0_and_shape(trained):
    f = fake_corpus(9, n=1)[0]
    out = convert_features(trained, f)
    assert out.mel_cepstra.shape == f.mel_cepstra.shape
    assert np.array_equal(out.f0, f.f0)


def test_convert_requires_stats():
    model = CycleGanModel.init(TrainConfig(iterations=1), SMALL)
    with pytest.raises(ValueError):
        convert_features(model, fake_corpus(0, n=1)[0])


def test_identity_generator_matches_vocoder_round_trip(trained):
    w = Waveform(toy.steady_vowel(140.0, (570.0, 840.0), 12000))
    # identity on normalized features, with both domains sharing statistics
    trained_same = CycleGanModel(trained.G, trained.F, trained.D_X, trained.D_Y,
                                 trained.source_stats, trained.source_stats, trained.config)
    y = convert_utterance(trained_same, w, generator=lambda x: x)
    assert y.sample_rate == 16000
    assert abs(len(y) - len(w)) <= 160
    f, g = extract_features(w), extract_features(y)
    assert np.mean(log_spectral_distortion(f, g, interior_voiced(f))) <= 3.0


def test_convert_rejects_short_audio(trained):
    with pytest.raises(ValueError):
        convert_utterance(trained, Waveform(np.zeros(0)))
    with pytest.raises(ValueError):
        convert_utterance(trained, Waveform(np.zeros(100)))


def test_checkpoint_round_trip_is_byte_exact(tmp_path, trained):
    from vcforge.cyclegan import load_checkpoint, save_checkpoint

    save_checkpoint(trained, tmp_path / "a.vcgk")
    loaded = load_checkpoint(tmp_path / "a.vcgk")
    save_checkpoint(loaded, tmp_path / "b.vcgk")
    assert (tmp_path / "a.vcgk").read_bytes() == (tmp_path / "b.vcgk").read_bytes()
    assert loaded.config == trained.config and loaded.arch == trained.arch
    f = fake_corpus(4, n=1)[0]
    assert np.array_equal(convert_features(trained, f).mel_cepstra, convert_features(loaded, f).mel_cepstra)
    w = Waveform(toy.steady_vowel(150.0, (730.0, 1090.0), 6000))
    assert np.array_equal(convert_utterance(trained, w).samples, convert_utterance(loaded, w).samples)


def test_checkpoint_errors(trained):
    blob = dumps(trained)
    with pytest.raises(CheckpointError, match="truncated"):
        loads(blob[: len(blob) // 2])
    with pytest.raises(CheckpointError, match="magic"):
        loads(b"XXXX" + blob[4:])
    with pytest.raises(CheckpointError, match="version"):
        loads(blob[:4] + (99).to_bytes(4, "little") + blob[8:])
    with pytest.raises(CheckpointError, match="trailing"):
        loads(blob + b"\0")


def test_converter_estimator(trained):
    est = CycleGANConverter(iterations=3)
    assert est.get_params()["lambda_cyc"] == 10.0
    from sklearn.exceptions import NotFittedError

    with pytest.raises(NotFittedError):
        est.transform(fake_corpus(0, n=1))
    est = CycleGANConverter.from_model(trained)
    assert est.get_params()["base_channels"] == SMALL.base_channels
    (out,) = est.transform(fake_corpus(2, n=1))
    assert out.mel_cepstra.shape[1] == 24
