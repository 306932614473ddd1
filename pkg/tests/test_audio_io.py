import wave

import numpy as np
import pytest

from trivox.dsp import AudioBuffer, from_float, load_audio, save_wav
from trivox.errors import AudioError

from conftest import tone


def test_wav_round_trip(tmp_path):
    buf = from_float(tone(200.0, 0.5))
    path = tmp_path / "t.wav"
    save_wav(path, buf)
    back = load_audio(path)
    assert np.array_equal(back.samples, buf.samples)


def test_raw_pcm_round_trip(tmp_path):
    buf = from_float(tone(300.0, 0.25))
    path = tmp_path / "t.pcm"
    buf.samples.astype("<i2").tofile(path)
    back = load_audio(path)
    assert np.array_equal(back.samples, buf.samples)


def test_wrong_sample_rate_rejected(tmp_path):
    path = tmp_path / "8k.wav"
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(8000)
        wf.writeframes(b"\x00\x00" * 100)
    with pytest.raises(AudioError, match="16000"):
        load_audio(path)


def test_stereo_rejected(tmp_path):
    path = tmp_path / "st.wav"
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(2)
        wf.setsampwidth(2)
        wf.setframerate(16000)
        wf.writeframes(b"\x00\x00\x00\x00" * 100)
    with pytest.raises(AudioError, match="mono"):
        load_audio(path)


def test_missing_file():
    with pytest.raises(AudioError, match="not found"):
        load_audio("/nonexistent/audio.wav")


def test_buffer_invariants():
    with pytest.raises(AudioError, match="sample rate"):
        AudioBuffer(np.zeros(10, dtype=np.int16), sample_rate_hz=8000)
    with pytest.raises(AudioError, match="int16"):
        AudioBuffer(np.zeros(10, dtype=np.float32))


def test_normalized_range():
    buf = from_float(np.array([-1.0, 0.0, 0.5]))
    x = buf.normalized()
    assert x[0] == -1.0 and x[1] == 0.0 and abs(x[2] - 0.5) < 1e-4
