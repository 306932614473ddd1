import numpy as np
import pytest

from trivox.fixtures import make_corpus, load_manifest


@pytest.fixture(scope="session")
def corpus(tmp_path_factory):
    """The 20-utterance synthetic corpus used by benchmark-style tests."""
    root = tmp_path_factory.mktemp("corpus")
    manifest = make_corpus(root, count=20, seed=1234)
    return manifest


@pytest.fixture(scope="session")
def corpus_entries(corpus):
    return load_manifest(corpus)


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("small_corpus")
    return make_corpus(root, count=4, seed=77, duration_range=(10.0, 16.0))


def tone(freq_hz: float, duration_s: float, amplitude: float = 0.5, sr: int = 16000):
    t = np.arange(int(duration_s * sr)) / sr
    return amplitude * np.sin(2 * np.pi * freq_hz * t)
