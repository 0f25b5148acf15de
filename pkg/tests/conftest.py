from pathlib import Path

import pytest

from debtstress.ingest import (DatasetManifest, default_manifest, load_history,
                               load_manifest_calibration, load_projections)

REPO = Path(__file__).resolve().parents[1]
REPLICATION = REPO / "replication"

# filled by test_acceptance, printed at the end of the session
ACCEPTANCE_LINES = {}


@pytest.fixture(scope="session")
def manifest():
    return default_manifest()


@pytest.fixture(scope="session")
def replication_manifest():
    return DatasetManifest.load(REPLICATION / "manifest.yaml")


@pytest.fixture(scope="session")
def calibration(manifest):
    return load_manifest_calibration(manifest)


@pytest.fixture(scope="session")
def projections(manifest):
    return load_projections(manifest)[0]


@pytest.fixture(scope="session")
def history(manifest):
    return load_history(manifest)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
