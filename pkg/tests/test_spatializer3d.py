import numpy as np
import pytest

from spataudio.audio_io import AudioBuffer
from spataudio.dsp import StftParams
from spataudio.errors import ConfigurationError
from spataudio.scene import SpatialSample
from spataudio.spatializer3d import (
    DistanceEffect,
    RenderConfig,
    distance_effect,
    elevation_filter,
    elevation_gain,
    pan_lr,
    render_source_3d,
)

FS = 16000


def rms(x):
    return np.sqrt(np.mean(np.asarray(x) ** 2))


def sine(freq, seconds=1.0, fs=FS, amp=1.0):
    return amp * np.sin(2 * np.pi * freq * np.arange(int(seconds * fs)) / fs)


# ------------------------------------------------------------------- panning

def test_pan_center_splits_in_half():
    s = np.array([1.0, -0.5, 0.25])
    left, right = pan_lr(s, 0.0)
    assert np.array_equal(left, 0.5 * s)
    assert np.array_equal(right, 0.5 * s)


def test_pan_hard_right_zeroes_left():
    s = np.array([0.3, 0.9, -1.0])
    left, right = pan_lr(s, 1.0)
    assert np.all(left == 0.0)
    assert np.array_equal(right, s)


def test_pan_weights_at_minus_half():
    s = np.array([0.8, -0.4])
    left, right = pan_lr(s, -0.5)
    assert np.allclose(left, 0.75 * s, atol=1e-12)
    assert np.allclose(right, 0.25 * s, atol=1e-12)


def test_pan_partition_exact_for_many_positions():
    rng = np.random.default_rng(0)
    s = rng.uniform(-1, 1, 256)
    for x in np.linspace(-1.0, 1.0, 1001):
        left, right = pan_lr(s, x)
        assert np.array_equal(left + right, s)


def test_pan_rejects_out_of_range():
    with pytest.raises(ValueError):
        pan_lr(np.ones(4), 1.5)


# ------------------------------------------------------------ elevation gain

def test_elevation_gain_identity_at_y0():
    for f in (0.0, 250.0, 1000.0, 7999.0):
        assert elevation_gain(f, 0.0) == 1.0


def test_elevation_gain_doubles_at_pivot():
    assert elevation_gain(1000.0, 1.0) == pytest.approx(2.0, abs=1e-12)


def test_elevation_gain_clamps_negative():
    # 4 kHz: (4)^1.5 = 8, raw gain 1 - 0.2*8 = -0.6 -> floored at 0
    assert elevation_gain(4000.0, -0.2) == 0.0


def test_elevation_gain_vectorized():
    f = np.array([0.0, 1000.0, 4000.0])
    out = elevation_gain(f, -0.2)
    assert out == pytest.approx([0.8 + 0.2, 0.8, 0.0])  # [1.0, 0.8, 0.0]


def test_elevation_gain_rejects_negative_frequency():
    with pytest.raises(ValueError):
        elevation_gain(-10.0, 0.5)


# ---------------------------------------------------------- elevation filter

def stereo_buffer(x):
    return AudioBuffer(FS, np.vstack([x, x]))


def test_elevation_filter_identity_when_flat():
    rng = np.random.default_rng(1)
    x = rng.uniform(-0.5, 0.5, FS)
    out = elevation_filter(stereo_buffer(x), lambda t: 0.0)
    assert rms(out.channels[0] - x) < 1e-6
    assert rms(out.channels[1] - x) < 1e-6


def test_elevation_filter_doubles_pivot_tone():
    x = sine(1000.0)
    out = elevation_filter(stereo_buffer(x), lambda t: 1.0)
    core = slice(2000, FS - 2000)
    ratio = rms(out.channels[0][core]) / rms(x[core])
    assert ratio == pytest.approx(2.0, rel=0.02)


def test_elevation_filter_kills_high_tone_below_listener():
    x = sine(4000.0)
    out = elevation_filter(stereo_buffer(x), lambda t: -1.0)
    assert rms(out.channels[0]) < 0.01 * rms(x)


def test_elevation_filter_same_gain_both_channels():
    rng = np.random.default_rng(2)
    x = rng.uniform(-0.5, 0.5, 8000)
    buf = AudioBuffer(FS, np.vstack([x, 0.25 * x]))
    out = elevation_filter(buf, lambda t: 0.6)
    assert np.max(np.abs(out.channels[1] - 0.25 * out.channels[0])) < 1e-6


def test_elevation_filter_requires_stereo():
    with pytest.raises(ConfigurationError):
        elevation_filter(AudioBuffer(FS, np.zeros(1000)), lambda t: 0.0)


# ------------------------------------------------------------------ distance

def test_distance_taps_at_one_meter():
    cfg = RenderConfig()
    impulse = np.zeros(160)
    impulse[0] = 1.0
    out = distance_effect(impulse, 1.0, cfg)
    assert out[0] == pytest.approx(1.0, abs=1e-12)
    assert out[47] == pytest.approx(0.3, abs=1e-12)  # round(16000/343) = 47
    mask = np.ones(160, bool)
    mask[[0, 47]] = False
    assert np.all(out[mask] == 0.0)


def test_distance_taps_at_0343_meters():
    cfg = RenderConfig()
    impulse = np.zeros(64)
    impulse[0] = 1.0
    out = distance_effect(impulse, 0.343, cfg)
    assert out[0] == pytest.approx(1.0 / 0.343, abs=1e-9)    # 2.915...
    assert out[16] == pytest.approx(0.3 / 0.343, abs=1e-9)   # delay exactly 16


def test_distance_taps_at_two_meters():
    cfg = RenderConfig()
    impulse = np.zeros(160)
    impulse[0] = 1.0
    out = distance_effect(impulse, 2.0, cfg)
    assert out[0] == pytest.approx(0.5, abs=1e-12)
    assert out[93] == pytest.approx(0.15, abs=1e-12)  # round(93.294) = 93


def test_distance_alpha_zero_is_pure_gain():
    cfg = RenderConfig(alpha=0.0)
    rng = np.random.default_rng(3)
    x = rng.uniform(-1, 1, 400)
    assert np.allclose(distance_effect(x, 2.5, cfg), x / 2.5, atol=1e-12)


def test_distance_rejects_nonpositive_z():
    with pytest.raises(ValueError):
        distance_effect(np.ones(10), 0.0, RenderConfig())


def test_distance_streaming_matches_single_shot():
    cfg = RenderConfig()
    rng = np.random.default_rng(4)
    x = rng.uniform(-1, 1, 800)
    whole = distance_effect(x, 1.7, cfg)
    effect = DistanceEffect(cfg)
    chunked = np.concatenate([effect.process(x[i:i + 160], 1.7) for i in range(0, 800, 160)])
    assert np.array_equal(whole, chunked)


# ------------------------------------------------------------- full renderer

def static_traj(x, y, z):
    return (SpatialSample(0.0, x, y, z),)


def test_render_static_center_impulse():
    cfg = RenderConfig()
    impulse = np.zeros(FS)
    impulse[0] = 1.0
    out = render_source_3d(AudioBuffer(FS, impulse), static_traj(0.0, 0.0, 1.0), cfg)
    assert out.num_channels == 2
    for ch in range(2):
        assert out.channels[ch][0] == pytest.approx(0.5, abs=1e-5)
        assert out.channels[ch][47] == pytest.approx(0.15, abs=1e-5)
        rest = np.delete(out.channels[ch], [0, 47])
        assert np.max(np.abs(rest)) < 1e-5


def test_render_hard_left_silences_right():
    cfg = RenderConfig()
    rng = np.random.default_rng(5)
    x = rng.uniform(-0.8, 0.8, FS)
    out = render_source_3d(AudioBuffer(FS, x), static_traj(-1.0, 0.0, 1.0), cfg)
    assert np.max(np.abs(out.channels[1])) < 1e-9
    assert rms(out.channels[0]) > 0.1


def test_render_output_length_includes_echo_tail():
    cfg = RenderConfig()
    x = np.zeros(1234)
    x[0] = 1.0
    out = render_source_3d(AudioBuffer(FS, x), static_traj(0.0, 0.0, 1.0), cfg)
    assert out.num_samples == 1234 + cfg.max_echo_delay()
    assert cfg.max_echo_delay() == 233  # round(5 * 16000 / 343)


def test_render_sweep_moves_energy_left_to_right():
    cfg = RenderConfig()
    rng = np.random.default_rng(6)
    x = rng.uniform(-0.5, 0.5, 2 * FS)
    traj = (SpatialSample(0.0, -1.0, 0.0, 1.0), SpatialSample(2.0, 1.0, 0.0, 1.0))
    out = render_source_3d(AudioBuffer(FS, x), traj, cfg)
    tenth = out.num_samples // 10
    first_l, first_r = rms(out.channels[0][:tenth]), rms(out.channels[1][:tenth])
    last_l, last_r = rms(out.channels[0][-tenth:]), rms(out.channels[1][-tenth:])
    assert 20 * np.log10(first_l / first_r) >= 20
    assert 20 * np.log10(last_r / last_l) >= 20


def test_render_is_linear_in_amplitude():
    cfg = RenderConfig()
    rng = np.random.default_rng(7)
    x = rng.uniform(-0.5, 0.5, 4000)
    traj = static_traj(0.3, 0.4, 1.5)
    full = render_source_3d(AudioBuffer(FS, x), traj, cfg)
    scaled = render_source_3d(AudioBuffer(FS, 0.25 * x), traj, cfg)
    assert np.max(np.abs(scaled.channels - 0.25 * full.channels)) < 1e-9


def test_render_no_nan_for_extreme_positions():
    cfg = RenderConfig()
    rng = np.random.default_rng(8)
    x = rng.uniform(-1, 1, 4000)
    traj = (
        SpatialSample(0.0, -1.0, 1.0, 0.1),
        SpatialSample(0.125, 1.0, -1.0, 5.0),
        SpatialSample(0.25, 0.0, 0.0, 0.1),
    )
    out = render_source_3d(AudioBuffer(FS, x), traj, cfg)
    assert np.all(np.isfinite(out.channels))


def test_render_rejects_stereo_input():
    cfg = RenderConfig()
    with pytest.raises(ConfigurationError):
        render_source_3d(AudioBuffer(FS, np.zeros((2, 100))), static_traj(0, 0, 1), cfg)


def test_render_rejects_rate_mismatch():
    cfg = RenderConfig()
    with pytest.raises(ConfigurationError):
        render_source_3d(AudioBuffer(48000, np.zeros(100)), static_traj(0, 0, 1), cfg)


def test_config_rejects_block_not_dividing_hop():
    with pytest.raises(ConfigurationError):
        RenderConfig(block=100)


def test_config_defaults_match_documented_parameters():
    cfg = RenderConfig()
    assert cfg.sample_rate == 16000
    assert cfg.alpha == 0.3
    assert cfg.speed_of_sound == 343.0
    assert cfg.elevation_pivot_hz == 1000.0
    assert cfg.elevation_exponent == 1.5
    assert (cfg.camera.d_min, cfg.camera.d_max) == (0.1, 5.0)
    assert (cfg.stft.window_ms, cfg.stft.hop_ms, cfg.stft.fft_size) == (25.0, 10.0, 512)
