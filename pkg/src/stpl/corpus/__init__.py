"""Shipped example formulas, the sample stream and their expected verdicts."""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path


def path(name: str) -> Path:
    return Path(str(resources.files(__name__).joinpath(name)))


def manifest() -> dict:
    return json.loads(path("manifest.json").read_text())
