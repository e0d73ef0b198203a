import json
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from piotrowski.dataset import merge_datasets, read_dataset  # noqa: E402

DATA = Path(__file__).parent / "data"

CHANGES = [
    "wietszy_wiekszy",
    "barzo_bardzo",
    "bych_bym",
    "bychmy_bysmy",
    "na_naj",
    "ir_er",
    "inszy_inny",
    "wszytek_wszystek",
    "abo_albo",
]

# the seven changes of the window/overlap evaluation
GRID_CHANGES = ["wietszy_wiekszy", "bych_merged", "barzo_bardzo", "na_naj", "inszy_inny",
                "wszytek_wszystek", "ir_er"]


@pytest.fixture(scope="session")
def datasets():
    out = {name: read_dataset(DATA / f"{name}.csv") for name in CHANGES}
    out["bych_merged"] = merge_datasets(out["bych_bym"], out["bychmy_bysmy"], "bych_merged")
    return out


@pytest.fixture(scope="session")
def expected():
    return json.loads((DATA / "expected.json").read_text())


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
