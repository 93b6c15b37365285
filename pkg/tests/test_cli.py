import json

import numpy as np
import pytest

from spataudio.audio_io import AudioBuffer, load_wav, save_wav
from spataudio.cli import main
from spataudio.scene import parse_scene

FS = 16000


def run(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def write_basic_scene(tmp_path, x=0.0):
    rng = np.random.default_rng(0)
    save_wav(tmp_path / "stem.wav", AudioBuffer(FS, rng.uniform(-0.3, 0.3, FS)))
    doc = {
        "fps": 25,
        "sources": [
            {"id": "s1", "audio": "stem.wav",
             "trajectory": [{"t": 0, "x": x, "y": 0, "z": 1.0}]}
        ],
    }
    scene_path = tmp_path / "scene.json"
    scene_path.write_text(json.dumps(doc))
    return scene_path


# -------------------------------------------------------------------- render

def test_render_happy_path(tmp_path, capsys):
    scene = write_basic_scene(tmp_path)
    out = tmp_path / "out.wav"
    code, stdout, _ = run(["render", "--scene", str(scene), "--method", "algo3d",
                           "--out", str(out)], capsys)
    assert code == 0
    assert out.exists()
    assert "1 source(s)" in stdout
    rendered = load_wav(out)
    assert rendered.num_channels == 2
    assert rendered.sample_rate == FS


def test_render_hrtf_without_hrir_is_usage_error(tmp_path, capsys):
    scene = write_basic_scene(tmp_path)
    code, _, stderr = run(["render", "--scene", str(scene), "--method", "hrtf",
                           "--out", str(tmp_path / "o.wav")], capsys)
    assert code == 2
    assert "hrir" in stderr.lower()
    assert not (tmp_path / "o.wav").exists()


def test_render_missing_audio_is_io_error(tmp_path, capsys):
    doc = {"fps": 25, "sources": [{"id": "ghost", "audio": "gone.wav",
                                   "trajectory": [{"t": 0, "x": 0, "y": 0, "z": 1}]}]}
    scene = tmp_path / "scene.json"
    scene.write_text(json.dumps(doc))
    code, _, stderr = run(["render", "--scene", str(scene), "--method", "algo3d",
                           "--out", str(tmp_path / "o.wav")], capsys)
    assert code == 1
    assert "ghost" in stderr


def test_render_with_hrir_manifest(tmp_path, capsys):
    scene = write_basic_scene(tmp_path)
    delta = np.zeros(8)
    delta[0] = 1.0
    for side in ("left", "right"):
        save_wav(tmp_path / f"ir_{side}.wav", AudioBuffer(FS, delta), bit_depth=32)
    manifest = tmp_path / "hrir.json"
    manifest.write_text(json.dumps({
        "sample_rate": FS,
        "entries": [{"az_deg": 0.0, "el_deg": 0.0, "left": "ir_left.wav",
                     "right": "ir_right.wav"}],
    }))
    out = tmp_path / "out.wav"
    code, _, _ = run(["render", "--scene", str(scene), "--method", "hrtf",
                      "--hrir", str(manifest), "--out", str(out)], capsys)
    assert code == 0
    assert load_wav(out).num_channels == 2


def test_render_rerender_bit_identical(tmp_path, capsys):
    scene = write_basic_scene(tmp_path, x=-1.0)
    out1, out2 = tmp_path / "a.wav", tmp_path / "b.wav"
    for out in (out1, out2):
        code, _, _ = run(["render", "--scene", str(scene), "--method", "algo3d",
                          "--out", str(out)], capsys)
        assert code == 0
    assert out1.read_bytes() == out2.read_bytes()


# ------------------------------------------------------------------ evaluate

def test_evaluate_self_and_report_file(tmp_path, capsys):
    t = np.arange(FS) / FS
    wav = tmp_path / "x.wav"
    save_wav(wav, AudioBuffer(FS, 0.4 * np.sin(2 * np.pi * 440 * t)))
    report_path = tmp_path / "report.json"
    code, stdout, _ = run(["evaluate", "--ref", str(wav), "--pred", str(wav),
                           "--out", str(report_path)], capsys)
    assert code == 0
    report = json.loads(stdout)
    assert report["stft_distance"] == pytest.approx(0.0, abs=1e-6)
    assert report["env_distance"] == pytest.approx(0.0, abs=1e-6)
    assert report_path.read_text() == stdout


def test_evaluate_missing_file(tmp_path, capsys):
    wav = tmp_path / "x.wav"
    save_wav(wav, AudioBuffer(FS, np.ones(FS) * 0.1))
    code, _, stderr = run(["evaluate", "--ref", str(wav),
                           "--pred", str(tmp_path / "nope.wav")], capsys)
    assert code == 1
    assert "error" in stderr


# --------------------------------------------------------------- scene-build

def detections_doc():
    return {
        "fps": 30,
        "width": 1280,
        "height": 720,
        "detections": [
            {"frame": 0, "track_id": "face0", "x_center": 0.5, "y_center": 0.5, "gray": 255},
            {"frame": 1, "track_id": "face0", "x_center": 0.6, "y_center": 0.5, "gray": 200},
        ],
    }


def test_scene_build_composes_coordinates(tmp_path, capsys):
    det = tmp_path / "det.json"
    det.write_text(json.dumps(detections_doc()))
    out = tmp_path / "scene.json"
    code, _, _ = run(["scene-build", "--detections", str(det),
                      "--map", "face0=voice.wav", "--fps", "30",
                      "--out", str(out)], capsys)
    assert code == 0
    scene = parse_scene(out.read_bytes())
    first = scene.sources[0].trajectory[0]
    assert first.time == 0.0
    assert (first.x, first.y) == (0.0, 0.0)
    assert first.z == 0.1
    assert scene.sources[0].audio_path == "voice.wav"


def test_scene_build_fps_from_file(tmp_path, capsys):
    det = tmp_path / "det.json"
    det.write_text(json.dumps(detections_doc()))
    out = tmp_path / "scene.json"
    code, _, _ = run(["scene-build", "--detections", str(det),
                      "--map", "face0=voice.wav", "--out", str(out)], capsys)
    assert code == 0
    assert parse_scene(out.read_bytes()).fps == 30


def test_scene_build_unmapped_track_exits_2(tmp_path, capsys):
    doc = detections_doc()
    doc["detections"].append(
        {"frame": 0, "track_id": "face1", "x_center": 0.2, "y_center": 0.4, "gray": 100})
    det = tmp_path / "det.json"
    det.write_text(json.dumps(doc))
    code, _, stderr = run(["scene-build", "--detections", str(det),
                           "--map", "face0=voice.wav",
                           "--out", str(tmp_path / "s.json")], capsys)
    assert code == 2
    assert "face1" in stderr


def test_scene_build_camera_flags(tmp_path, capsys):
    det = tmp_path / "det.json"
    det.write_text(json.dumps(detections_doc()))
    out = tmp_path / "scene.json"
    code, _, _ = run(["scene-build", "--detections", str(det),
                      "--map", "face0=v.wav", "--dmax", "8.0", "--hfov", "100",
                      "--out", str(out)], capsys)
    assert code == 0
    scene = parse_scene(out.read_bytes())
    assert scene.camera.d_max == 8.0
    assert scene.camera.h_fov == 100.0


# --------------------------------------------------------------- scene-synth

def test_scene_synth_sweep(tmp_path, capsys):
    out_dir = tmp_path / "fixture"
    code, _, _ = run(["scene-synth", "--sources", "2", "--duration", "1.0",
                      "--preset", "sweep", "--seed", "7", "--out-dir", str(out_dir)], capsys)
    assert code == 0
    scene = parse_scene((out_dir / "scene.json").read_bytes(), base_dir=out_dir)
    assert len(scene.sources) == 2
    for src in scene.sources:
        assert src.trajectory[0].x == -1.0
        assert src.trajectory[-1].x == 1.0
        assert load_wav(src.audio_path).num_samples == FS


def test_scene_synth_deterministic(tmp_path, capsys):
    dirs = [tmp_path / "a", tmp_path / "b"]
    for d in dirs:
        code, _, _ = run(["scene-synth", "--sources", "1", "--duration", "0.5",
                          "--preset", "static", "--seed", "3", "--out-dir", str(d)], capsys)
        assert code == 0
    assert (dirs[0] / "scene.json").read_bytes() == (dirs[1] / "scene.json").read_bytes()
    assert (dirs[0] / "src1.wav").read_bytes() == (dirs[1] / "src1.wav").read_bytes()


def test_scene_synth_single_static_source_is_hard_left(tmp_path, capsys):
    out_dir = tmp_path / "fixture"
    code, _, _ = run(["scene-synth", "--sources", "1", "--duration", "0.5",
                      "--preset", "static", "--seed", "1", "--out-dir", str(out_dir)], capsys)
    assert code == 0
    scene = parse_scene((out_dir / "scene.json").read_bytes())
    assert scene.sources[0].trajectory[0].x == -1.0


def test_scene_synth_zero_duration_exits_2(tmp_path, capsys):
    code, _, _ = run(["scene-synth", "--sources", "1", "--duration", "0",
                      "--preset", "static", "--out-dir", str(tmp_path / "x")], capsys)
    assert code == 2


def test_scene_synth_bad_preset_exits_2(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["scene-synth", "--sources", "1", "--duration", "1",
              "--preset", "spiral", "--out-dir", str(tmp_path / "x")])
    assert exc.value.code == 2


def test_missing_subcommand_exits_2():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2
