"""Shared fixtures: settings isolation, preset pairs, exact zero-potential nodes."""

from __future__ import annotations

import math

import numpy as np
import pytest

from confnodal.config import reset_settings
from confnodal.model import preset_pair
from confnodal.shared.types import NodalSet


@pytest.fixture(autouse=True)
def _isolated_settings(monkeypatch, tmp_path):
    """Every test starts from default settings and never reads a developer .env."""
    for key in ("GRID", "SCHEME", "LAMBDA_CAP", "LOG_LEVEL", "OUT_DIR"):
        monkeypatch.delenv(f"CONFNODAL_{key}", raising=False)
    monkeypatch.chdir(tmp_path)
    reset_settings()
    yield
    reset_settings()


@pytest.fixture
def pair():
    """Factory: pair("cosine", 0.5)."""
    return preset_pair


@pytest.fixture
def zero_nodes():
    """Factory for the exact nodes of the zero pencil: (x_n^j)^alpha = j pi^alpha / n."""

    def build(alpha: float, indices) -> NodalSet:
        entries = {
            n: math.pi * (np.arange(1, n, dtype=float) / n) ** (1.0 / alpha)
            for n in indices
        }
        return NodalSet(alpha=alpha, entries=entries)

    return build
