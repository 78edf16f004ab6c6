from __future__ import annotations

import shlex
import shutil

import pytest

from contractcheck.blocks import parse_blocks
from contractcheck.model import build_model

from helpers import bakery_text, solver_command


def pytest_addoption(parser):
    parser.addoption(
        "--external",
        action="store_true",
        help="also run tests that drive an external SMT-LIB2 solver",
    )


def pytest_collection_modifyitems(config, items):
    if config.getoption("--external"):
        exe = shlex.split(solver_command())[0]
        if shutil.which(exe):
            return
        reason = f"solver {exe!r} not found on PATH"
    else:
        reason = "external solver tests need --external"
    skip = pytest.mark.skip(reason=reason)
    for item in items:
        if "external" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def bakery_doc():
    return parse_blocks(bakery_text())


@pytest.fixture
def bakery(bakery_doc):
    return build_model(bakery_doc)


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE

    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
