"""Shared pytest fixtures for the fullnn test suite.

Provides:
- a default config isolated from the FULLNN_TOL override
- a temporary workspace directory
- frequently used behaviors (EJM points, the PR constructions)
- a helper writing behaviors to JSON files for CLI tests
"""

from __future__ import annotations

from collections.abc import Callable
from pathlib import Path

import numpy as np
import pytest

from fullnn.core.config import TOL_ENV_VAR, FullNNConfig, default_config
from fullnn.quantum import ejm_correlations
from fullnn.scenario import Behavior, behavior_to_json
from fullnn.strategies import bilocal_pr_strategy


@pytest.fixture(autouse=True)
def _no_tolerance_override(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.delenv(TOL_ENV_VAR, raising=False)


@pytest.fixture
def config() -> FullNNConfig:
    return default_config()


@pytest.fixture
def workspace(tmp_path: Path) -> Path:
    path = tmp_path / "workspace"
    path.mkdir()
    return path


@pytest.fixture
def ejm_pi4() -> Behavior:
    return ejm_correlations(np.pi / 4, 1.0)


@pytest.fixture
def ejm_theta0() -> Behavior:
    return ejm_correlations(0.0, 1.0)


@pytest.fixture
def pr_bilocal() -> Behavior:
    return bilocal_pr_strategy()


@pytest.fixture
def write_behavior(tmp_path: Path) -> Callable[[Behavior, str], Path]:
    def _write(b: Behavior, name: str = "behavior.json") -> Path:
        path = tmp_path / name
        path.write_text(behavior_to_json(b), encoding="utf-8")
        return path

    return _write
