from __future__ import annotations

import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from vlscore import default_lexicon


@pytest.fixture(scope="session")
def lexicon():
    return default_lexicon()


@pytest.fixture()
def write_jsonl(tmp_path):
    def _write(objs, name="manifest.jsonl"):
        path = tmp_path / name
        with open(path, "w", encoding="utf-8") as fh:
            for obj in objs:
                fh.write(json.dumps(obj) + "\n")
        return path

    return _write
