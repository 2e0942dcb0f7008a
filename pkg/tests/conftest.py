import numpy as np
import pytest

from acceptance_log import RESULTS
from morphtda import image_io
from morphtda.synth import textured_face


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def face(rng):
    return textured_face(rng)


@pytest.fixture
def tiny_dataset(tmp_path):
    """Four small images laid out as a genuine/morph dataset directory."""
    rng = np.random.default_rng(7)
    root = tmp_path / "ds"
    for label in ("genuine", "morph"):
        (root / label).mkdir(parents=True)
    for k in range(2):
        image_io.save_image(textured_face(rng, 60, 54), root / "genuine" / f"g{k}.pgm")
        image_io.save_image(textured_face(rng, 60, 54), root / "morph" / f"m{k}.png")
    return root


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(RESULTS, key=lambda l: int(l.split('AC')[1].split()[0])):
        terminalreporter.write_line(line)
