"""Line-delimited JSON protocol for out-of-process STT/TTS adapters.

One request per line on the child's stdin, one response per line on its
stdout. Requests carry base64 PCM (transcribe) or a manifest fragment
(synthesize); responses carry timed text chunks or a completion status.
Anything else -- malformed JSON, a missing field, a dead child, silence
past the deadline -- surfaces as an adapter error naming the offense.

    -> {"op": "transcribe", "pcm_b64": ..., "sample_rate": 16000,
        "segments": [[start_ms, end_ms], ...]}
    <- {"chunks": [{"text": ..., "t0_cs": ..., "t1_cs": ...}, ...]}

    -> {"op": "synthesize", "manifest": {...}}
    <- {"status": "ok"}
"""

from __future__ import annotations

import base64
import json
import selectors
import subprocess
from dataclasses import dataclass

from .dsp.audio import AudioBuffer
from .dsp.vad import VadSegment
from .errors import AdapterError, AdapterProtocolError
from .text_codec import MIN_TEXT_CHARS, TextChunk

DEFAULT_TIMEOUT_S = 10.0


class SubprocessClient:
    """Owns the child process and the request/response framing."""

    def __init__(self, command: list[str], timeout_s: float = DEFAULT_TIMEOUT_S):
        self.timeout_s = timeout_s
        try:
            self._proc = subprocess.Popen(
                command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise AdapterError(f"cannot start adapter {command!r}: {exc}") from exc
        self._selector = selectors.DefaultSelector()
        self._selector.register(self._proc.stdout, selectors.EVENT_READ)

    def request(self, payload: dict) -> dict:
        if self._proc.poll() is not None:
            raise AdapterError(
                f"adapter process exited with code {self._proc.returncode}"
            )
        try:
            self._proc.stdin.write(json.dumps(payload) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, ValueError) as exc:
            raise AdapterError(f"adapter stdin closed: {exc}") from exc
        if not self._selector.select(self.timeout_s):
            raise AdapterError(f"adapter timed out after {self.timeout_s:g} s")
        line = self._proc.stdout.readline()
        if not line:
            raise AdapterError(
                f"adapter exited mid-session (code {self._proc.poll()})"
            )
        try:
            response = json.loads(line)
        except json.JSONDecodeError as exc:
            raise AdapterProtocolError(f"malformed response line {line!r}: {exc}") from exc
        if not isinstance(response, dict):
            raise AdapterProtocolError(f"response is not an object: {line!r}")
        if "error" in response:
            raise AdapterError(f"adapter reported: {response['error']}")
        return response

    def close(self) -> None:
        try:
            if self._proc.poll() is None:
                self._proc.stdin.close()
                self._proc.wait(timeout=2)
        except Exception:
            self._proc.kill()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


@dataclass
class SubprocessSttAdapter:
    client: SubprocessClient

    @classmethod
    def spawn(cls, command: list[str], timeout_s: float = DEFAULT_TIMEOUT_S):
        return cls(SubprocessClient(command, timeout_s))

    def capabilities(self) -> dict:
        return {"name": "subprocess-stt"}

    def transcribe(self, audio: AudioBuffer, segments: list[VadSegment]) -> list[TextChunk]:
        response = self.client.request(
            {
                "op": "transcribe",
                "pcm_b64": base64.b64encode(audio.samples.astype("<i2").tobytes()).decode(),
                "sample_rate": audio.sample_rate_hz,
                "segments": [[s.start_ms, s.end_ms] for s in segments],
            }
        )
        raw = response.get("chunks")
        if not isinstance(raw, list):
            raise AdapterProtocolError(f"transcribe response missing 'chunks': {response}")
        chunks = []
        uid = 0
        for item in raw:
            try:
                text = str(item["text"])
                t0 = int(item["t0_cs"])
            except (TypeError, KeyError) as exc:
                raise AdapterProtocolError(f"bad chunk entry {item!r}") from exc
            if len(text.strip()) < MIN_TEXT_CHARS:
                continue
            chunks.append(TextChunk(utterance_id=uid, text=text, timestamp_cs=t0))
            uid += 1
        return chunks


@dataclass
class SubprocessTtsAdapter:
    client: SubprocessClient

    @classmethod
    def spawn(cls, command: list[str], timeout_s: float = DEFAULT_TIMEOUT_S):
        return cls(SubprocessClient(command, timeout_s))

    def synthesize(self, manifest: dict) -> str:
        response = self.client.request({"op": "synthesize", "manifest": manifest})
        status = response.get("status")
        if status != "ok":
            raise AdapterProtocolError(f"synthesize response not ok: {response}")
        return str(response.get("handle", "ok"))
