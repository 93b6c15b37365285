"""Shared signal builders for the test suite."""

import struct

import numpy as np

from spataudio.audio_io import AudioBuffer


def sine_buffer(freq, seconds, fs, amplitude=1.0, channels=1):
    t = np.arange(int(round(seconds * fs))) / fs
    x = amplitude * np.sin(2 * np.pi * freq * t)
    return AudioBuffer(fs, np.tile(x, (channels, 1)))


def speech_shaped_noise(fs, seconds, seed=0, channels=1):
    """White noise spectrally tilted like speech: flat to 500 Hz, -6 dB/oct above."""
    rng = np.random.default_rng(seed)
    n = int(round(seconds * fs))
    spectrum = np.fft.rfft(rng.standard_normal(n))
    freqs = np.fft.rfftfreq(n, 1.0 / fs)
    spectrum *= 1.0 / np.sqrt(1.0 + (freqs / 500.0) ** 2)
    x = np.fft.irfft(spectrum, n)
    x *= 0.25 / np.sqrt(np.mean(x * x))
    return AudioBuffer(fs, np.tile(x, (channels, 1)))


def pcm16_wav_bytes(int_samples, fs, channels=1):
    """Assemble a minimal PCM16 RIFF file by hand (independent of write_wav)."""
    frames = struct.pack(f"<{len(int_samples)}h", *int_samples)
    block = 2 * channels
    fmt = struct.pack("<HHIIHH", 1, channels, fs, fs * block, block, 16)
    body = b"fmt " + struct.pack("<I", 16) + fmt
    body += b"data" + struct.pack("<I", len(frames)) + frames
    return b"RIFF" + struct.pack("<I", 4 + len(body)) + b"WAVE" + body


def pcm24_wav_bytes(n_frames, fs):
    """A 24-bit PCM header with zero payload, for unsupported-codec checks."""
    frames = bytes(3 * n_frames)
    fmt = struct.pack("<HHIIHH", 1, 1, fs, fs * 3, 3, 24)
    body = b"fmt " + struct.pack("<I", 16) + fmt
    body += b"data" + struct.pack("<I", len(frames)) + frames
    return b"RIFF" + struct.pack("<I", 4 + len(body)) + b"WAVE" + body
