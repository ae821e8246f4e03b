import json
import pathlib
import sys

import pytest

HERE = pathlib.Path(__file__).parent
FIXTURES = HERE.parent / "fixtures"
sys.path.insert(0, str(HERE))

ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def fixture_path():
    return lambda name: str(FIXTURES / name)


@pytest.fixture
def fixture_json():
    def load(name):
        with open(FIXTURES / name, encoding="utf-8") as fh:
            return json.load(fh)

    return load


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])


from hypothesis import settings  # noqa: E402

# spectral tables and bases are cached on first use, so single examples can be slow
settings.register_profile("default", deadline=None)
settings.load_profile("default")
