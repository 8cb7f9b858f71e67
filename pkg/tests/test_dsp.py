import io
import wave

import numpy as np
import pytest
from scipy.fft import dct

from vcforge import toy
from vcforge.dsp import (
    FeatureExtractor,
    FeatureNormalizer,
    FeatureSequence,
    NormStats,
    Spectrogram,
    WavFormatError,
    Waveform,
    apply_norm,
    compute_norm_stats,
    estimate_f0,
    extract_features,
    interior_voiced,
    invert_norm,
    istft,
    load_features,
    load_wav,
    log_spectral_distortion,
    mel_cepstral_analysis,
    mel_cepstrum_to_envelope,
    save_features,
    save_wav,
    stft,
    synthesize,
)
from vcforge.dsp.mcep import band_centers, hz_to_mel, mel_filterbank
from vcforge.dsp.spectral import hann

SR = 16000


def sine(freq, seconds=1.0, amp=0.5, sr=SR):
    t = np.arange(int(seconds * sr)) / sr
    return amp * np.sin(2 * np.pi * freq * t)


def pulse_train(f0, seconds=1.0, sr=SR):
    x = np.zeros(int(seconds * sr))
    x[:: int(round(sr / f0))] = 0.8
    return x


# -- WAV I/O --------------------------------------------------------------------


def test_wav_round_trip_quantization(tmp_path):
    w = Waveform(sine(440.0))
    save_wav(tmp_path / "a.wav", w)
    back = load_wav(tmp_path / "a.wav")
    assert back.sample_rate == SR
    assert np.max(np.abs(back.samples - w.samples)) <= 1 / 32768


def test_wav_zero_round_trip(tmp_path):
    save_wav(tmp_path / "z.wav", Waveform(np.zeros(100)))
    assert np.all(load_wav(tmp_path / "z.wav").samples == 0)


def _write_raw(path, data: bytes, rate=SR, channels=1, width=2):
    with wave.open(str(path), "wb") as f:
        f.setnchannels(channels)
        f.setsampwidth(width)
        f.setframerate(rate)
        f.writeframes(data)


def test_wav_resamples_8k_input(tmp_path):
    pcm = (sine(200.0, sr=8000) * 32767).astype("<i2")
    _write_raw(tmp_path / "n.wav", pcm.tobytes(), rate=8000)
    w = load_wav(tmp_path / "n.wav")
    assert w.sample_rate == SR
    assert abs(len(w) - 2 * len(pcm)) <= 1


def test_wav_rejects_stereo(tmp_path):
    _write_raw(tmp_path / "s.wav", b"\x00" * 40, channels=2)
    with pytest.raises(WavFormatError, match="mono"):
        load_wav(tmp_path / "s.wav")


def test_wav_rejects_8bit(tmp_path):
    _write_raw(tmp_path / "b.wav", b"\x80" * 40, width=1)
    with pytest.raises(WavFormatError, match="16-bit"):
        load_wav(tmp_path / "b.wav")


def test_wav_rejects_truncated_data(tmp_path):
    save_wav(tmp_path / "t.wav", Waveform(sine(300.0, 0.1)))
    blob = (tmp_path / "t.wav").read_bytes()
    (tmp_path / "t.wav").write_bytes(blob[:-100])
    with pytest.raises(WavFormatError):
        load_wav(tmp_path / "t.wav")


def test_wav_rejects_non_wav(tmp_path):
    (tmp_path / "x.wav").write_bytes(b"not a wav file at all")
    with pytest.raises(WavFormatError):
        load_wav(tmp_path / "x.wav")


def test_save_wav_accepts_file_object():
    buf = io.BytesIO()
    save_wav(buf, Waveform(np.zeros(10)))
    assert buf.getvalue()[:4] == b"RIFF"


def test_waveform_validation():
    with pytest.raises(ValueError):
        Waveform(np.array([0.0, np.nan]))
    with pytest.raises(ValueError):
        Waveform(np.zeros(3), sample_rate=0)


# -- STFT ------------------------------------------------------------------------


def test_stft_frame_count():
    assert stft(Waveform(np.zeros(SR))).n_frames == 99


def test_stft_silence_is_zero():
    assert np.all(stft(Waveform(np.zeros(4000))).frames == 0)


def test_stft_bin_centered_sine_peaks_at_its_bin():
    k = 40
    s = stft(Waveform(sine(k * SR / 1024)))
    assert np.all(np.argmax(s.frames[1:-1], axis=1) == k)


def test_stft_too_short_or_small_fft():
    with pytest.raises(ValueError):
        stft(Waveform(np.zeros(100)))
    with pytest.raises(ValueError):
        stft(Waveform(np.zeros(4000)), n_fft=256)


def test_hann_is_periodic():
    w = hann(320)
    assert w[0] == 0 and w.size == 320
    np.testing.assert_allclose(w[:160] + w[160:], 1.0, atol=1e-12)


def test_istft_round_trip():
    x = np.random.default_rng(0).uniform(-0.5, 0.5, SR)
    y = istft(stft(Waveform(x))).samples
    # COLA-valid interior: skip the half-frames at either end
    assert np.max(np.abs(y[160:-160] - x[160 : len(y) - 160])) <= 1e-3


def test_istft_of_zero_spectrogram():
    s = Spectrogram(np.zeros((10, 513)), np.zeros((10, 513)))
    assert np.all(istft(s).samples == 0)


def test_istft_single_bin_gives_sinusoid():
    k, hop, n_frames = 32, 160, 50
    mags = np.zeros((n_frames, 513))
    mags[:, k] = 1.0
    # phases advance consistently with the bin frequency
    phases = np.zeros((n_frames, 513))
    phases[:, k] = (2 * np.pi * k * hop / 1024 * np.arange(n_frames)) % (2 * np.pi)
    y = istft(Spectrogram(mags, phases)).samples
    t = np.arange(len(y))
    mid = slice(320, len(y) - 320)
    # least-squares overlap-add of the un-windowed bin: cos / sum of squared windows
    w2 = np.zeros(len(y))
    for i in range(n_frames):
        w2[i * hop : i * hop + 320] += hann(320) ** 2
    expected = (2 / 1024) * np.cos(2 * np.pi * k / 1024 * t[mid]) / w2[mid]
    np.testing.assert_allclose(y[mid], expected, atol=1e-12)
    spectrum = np.abs(np.fft.rfft(y[mid] * np.hanning(len(y[mid])), 8 * 1024))
    assert abs(np.argmax(spectrum) * SR / (8 * 1024) - k * SR / 1024) < 2.0
    assert np.corrcoef(y[mid], np.cos(2 * np.pi * k / 1024 * t)[mid])[0, 1] > 0.95


def test_spectrogram_validation():
    with pytest.raises(ValueError):
        Spectrogram(-np.ones((2, 513)), np.zeros((2, 513)))
    with pytest.raises(ValueError):
        Spectrogram(np.ones((2, 10)), np.zeros((2, 10)))


# -- mel cepstra ---------------------------------------------------------------------


def _flat(t=3, value=1.0):
    return Spectrogram(np.full((t, 513), value), np.zeros((t, 513)))


def test_flat_spectrum_has_only_c0():
    c = mel_cepstral_analysis(_flat())
    assert c.shape == (3, 24)
    assert np.all(np.abs(c[:, 1:]) < 1e-6)


def test_doubling_magnitudes_shifts_c0_only():
    rng = np.random.default_rng(3)
    mags = rng.uniform(0.1, 2.0, (4, 513))
    a = mel_cepstral_analysis(Spectrogram(mags, np.zeros_like(mags)))
    b = mel_cepstral_analysis(Spectrogram(2 * mags, np.zeros_like(mags)))
    shift = np.log(2.0) * dct(np.ones(26), type=2, norm="ortho")[0]
    np.testing.assert_allclose(b[:, 0] - a[:, 0], shift, atol=1e-9)
    np.testing.assert_allclose(b[:, 1:], a[:, 1:], atol=1e-9)


def test_filterbank_shape_and_normalization():
    fb = mel_filterbank()
    assert fb.shape == (26, 513)
    np.testing.assert_allclose(fb.sum(axis=1), 1.0)
    assert np.all(np.diff(band_centers()) > 0) and band_centers()[-1] < 8000


def test_zero_cepstrum_is_flat_unit_envelope():
    np.testing.assert_allclose(mel_cepstrum_to_envelope(np.zeros(24)), 1.0)


def test_flat_envelope_round_trip():
    env = mel_cepstrum_to_envelope(mel_cepstral_analysis(_flat(1, 0.37))[0])
    np.testing.assert_allclose(env, 0.37, rtol=1e-3)


def test_smooth_envelope_round_trip_lsd_below_1db():
    rng = np.random.default_rng(11)
    mel_axis = hz_to_mel(np.fft.rfftfreq(1024, 1 / SR))
    for _ in range(5):
        # random smooth log envelope: a few low-order cosines on the mel axis
        coefs = rng.normal(0, 0.6, 4)
        u = mel_axis / mel_axis[-1]
        log_env = sum(c * np.cos(np.pi * (i + 1) * u) for i, c in enumerate(coefs))
        env = np.exp(log_env)
        back = mel_cepstrum_to_envelope(mel_cepstral_analysis(Spectrogram(env[None], np.zeros((1, 513))))[0])
        sel = (np.fft.rfftfreq(1024, 1 / SR) > band_centers()[0]) & (np.fft.rfftfreq(1024, 1 / SR) < band_centers()[-1])
        d = 20 * np.log10(back[sel] / env[sel])
        assert np.sqrt(np.mean(d**2)) <= 1.0


def test_cepstra_invariant_to_polarity():
    x = toy.steady_vowel(150.0, (730.0, 1090.0), 8000)
    a = mel_cepstral_analysis(stft(Waveform(x)))
    b = mel_cepstral_analysis(stft(Waveform(-x)))
    np.testing.assert_allclose(a, b, atol=1e-9)


# -- F0 ---------------------------------------------------------------------------------


def _interior(f0):
    return f0[3:-3]


def test_f0_pulse_train_100hz():
    f0, voiced = estimate_f0(Waveform(pulse_train(100.0)))
    inner = _interior(f0)[_interior(voiced)]
    assert inner.size > 50
    assert np.all(np.abs(inner - 100.0) <= 2.0)


def test_f0_sine_220hz():
    f0, voiced = estimate_f0(Waveform(sine(220.0)))
    inner = _interior(f0)[_interior(voiced)]
    assert inner.size > 50
    assert np.all(np.abs(inner - 220.0) <= 3.0)


def test_f0_silence_unvoiced():
    f0, voiced = estimate_f0(Waveform(np.zeros(SR)))
    assert not voiced.any() and np.all(f0 == 0)


def test_f0_doubles_with_pitch():
    lo = np.median(estimate_f0(Waveform(pulse_train(110.0)))[0][5:-5])
    hi = np.median(estimate_f0(Waveform(pulse_train(220.0)))[0][5:-5])
    assert abs(hi / lo - 2.0) <= 0.1


def test_f0_noise_is_mostly_unvoiced():
    noise = np.random.default_rng(0).normal(0, 0.3, SR)
    _, voiced = estimate_f0(Waveform(noise))
    assert voiced.mean() < 0.2


# -- features, normalization, cache ----------------------------------------------------------


def test_feature_sequence_invariants():
    with pytest.raises(ValueError):
        FeatureSequence(np.zeros((3, 24)), np.array([0.0, 30.0, 100.0]))
    with pytest.raises(ValueError):
        FeatureSequence(np.zeros((3, 24)), np.zeros(2))
    with pytest.raises(ValueError):
        FeatureSequence(np.zeros((3, 25)), np.zeros(3))


def test_extract_features_is_deterministic():
    w = Waveform(toy.steady_vowel(140.0, (300.0, 2290.0), 8000))
    a, b = extract_features(w), extract_features(w)
    assert a.mel_cepstra.shape[1] == 24
    assert np.array_equal(a.mel_cepstra, b.mel_cepstra) and np.array_equal(a.f0, b.f0)


def test_feature_extractor_estimator():
    w = Waveform(toy.steady_vowel(140.0, (300.0, 2290.0), 4000))
    est = FeatureExtractor()
    assert est.get_params()["hop_ms"] == 10.0
    (f,) = est.fit_transform([w])
    assert np.array_equal(f.mel_cepstra, extract_features(w).mel_cepstra)


def test_feature_cache_round_trip(tmp_path):
    f = extract_features(Waveform(toy.steady_vowel(140.0, (300.0, 2290.0), 4000)))
    save_features(tmp_path / "a.vcf", f)
    g = load_features(tmp_path / "a.vcf")
    np.testing.assert_array_equal(g.mel_cepstra, f.mel_cepstra.astype(np.float32))
    save_features(tmp_path / "b.vcf", g)
    assert (tmp_path / "a.vcf").read_bytes() == (tmp_path / "b.vcf").read_bytes()
    (tmp_path / "c.vcf").write_bytes((tmp_path / "a.vcf").read_bytes()[:-3])
    with pytest.raises(ValueError):
        load_features(tmp_path / "c.vcf")


def _corpus(seed=0, n=4):
    rng = np.random.default_rng(seed)
    mats = [rng.normal(5.0, 3.0, (int(rng.integers(20, 60)), 24)) for _ in range(n)]
    return [FeatureSequence(m, np.zeros(len(m))) for m in mats]


def test_norm_stats_standardize_pooled_frames():
    corpus = _corpus()
    stats = compute_norm_stats(corpus)
    pooled = np.concatenate([apply_norm(f, stats).mel_cepstra for f in corpus])
    assert np.all(np.abs(pooled.mean(axis=0)) <= 1e-5)
    assert np.all(np.abs(pooled.var(axis=0) - 1) <= 1e-4)


def test_norm_inverse_pair():
    corpus = _corpus(1)
    stats = compute_norm_stats(corpus)
    for f in corpus:
        np.testing.assert_allclose(invert_norm(apply_norm(f, stats), stats).mel_cepstra, f.mel_cepstra, atol=1e-6)


def test_norm_constant_coefficient_is_floored():
    m = np.random.default_rng(0).normal(size=(30, 24))
    m[:, 5] = 2.0
    stats = compute_norm_stats([FeatureSequence(m, np.zeros(30))])
    assert stats.std[5] == 1e-8
    assert np.all(np.isfinite(apply_norm(FeatureSequence(m, np.zeros(30)), stats).mel_cepstra))


def test_norm_stats_empty_corpus():
    with pytest.raises(ValueError):
        compute_norm_stats([])


def test_feature_normalizer_estimator():
    corpus = _corpus(2)
    est = FeatureNormalizer().fit(corpus)
    out = est.inverse_transform(est.transform(corpus))
    for a, b in zip(out, corpus):
        np.testing.assert_allclose(a.mel_cepstra, b.mel_cepstra, atol=1e-9)
    assert isinstance(NormStats(np.zeros(24), np.ones(24)).std, np.ndarray)


# -- vocoder ------------------------------------------------------------------------------------


def test_vocoder_round_trip_on_vowel():
    w = Waveform(toy.steady_vowel(130.0, (650.0, 1250.0), SR))
    f = extract_features(w)
    g = extract_features(synthesize(f))
    mask = interior_voiced(f)
    assert mask.sum() > 50
    assert np.mean(log_spectral_distortion(f, g, mask)) <= 3.0


def test_vocoder_unvoiced_output_is_noise_like():
    f = FeatureSequence(np.zeros((100, 24)), np.zeros(100))
    y = synthesize(f).samples
    zcr = np.mean(np.abs(np.diff(np.sign(y))) > 0)
    assert zcr > 0.2


def test_vocoder_zero_frames_and_peak():
    assert len(synthesize(FeatureSequence(np.zeros((0, 24)), np.zeros(0)))) == 0
    f = FeatureSequence(np.zeros((50, 24)), np.full(50, 120.0))
    y = synthesize(f)
    assert y.sample_rate == SR
    assert np.isclose(np.max(np.abs(y.samples)), 0.9)


def test_vocoder_is_deterministic():
    f = FeatureSequence(np.random.default_rng(0).normal(0, 0.3, (40, 24)), np.r_[np.zeros(20), np.full(20, 150.0)])
    assert np.array_equal(synthesize(f).samples, synthesize(f).samples)
