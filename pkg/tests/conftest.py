import csv
import pathlib

import pytest
from hypothesis import settings

from relhyp.formats import parse_aut, parse_beta

ROOT = pathlib.Path(__file__).resolve().parent.parent
DATA = ROOT / "data"

settings.register_profile("relhyp", max_examples=60, deadline=None)
settings.load_profile("relhyp")


def load_aut(name):
    return parse_aut((DATA / name).read_text())


def load_beta(name):
    return parse_beta((DATA / f"{name}_beta" / "betatt.beta").read_text())


def load_constants(name):
    """Shipped constants as a dict of strings (header lines skipped)."""
    lines = [ln for ln in (DATA / f"{name}_beta" / "constants.csv").read_text().splitlines()
             if not ln.startswith("#")]
    return {row["constant"]: row["value"] for row in csv.DictReader(lines)}


@pytest.fixture(scope="session")
def fib():
    return load_aut("fib.aut")


@pytest.fixture(scope="session")
def bab():
    return load_aut("bab.aut")


@pytest.fixture(scope="session")
def linear():
    return load_aut("linear.aut")


@pytest.fixture(scope="session")
def fib_cx():
    return load_beta("fib")


@pytest.fixture(scope="session")
def bab_cx():
    return load_beta("bab")


@pytest.fixture(scope="session")
def fibc_cx():
    return load_beta("fibc")


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(RESULTS, key=lambda k: (int(k.rstrip("b")), k)):
        terminalreporter.write_line(RESULTS[key])
