from pathlib import Path

import pytest

DATA_DIR = Path(__file__).resolve().parents[1] / "src" / "senscommon" / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def corpus_fixture(data_dir) -> Path:
    return data_dir / "corpus_fixture.txt"


@pytest.fixture(scope="session")
def parses_fixture(data_dir) -> Path:
    return data_dir / "parses_fixture.conllu"


@pytest.fixture(scope="session")
def vectors_fixture(data_dir) -> Path:
    return data_dir / "fixture_vectors.txt"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion at the end of the run."""
    lines = []
    for status in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(status, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py" in nodeid:
                name = nodeid.split("::")[-1]
                lines.append((name, status))
    if not lines:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, status in sorted(set(lines)):
        mark = "PASS" if status == "passed" else "FAIL"
        terminalreporter.write_line(f"[{mark}] {name}")
