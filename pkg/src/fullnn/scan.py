"""Parameter sweeps over the EJM family.

Every grid point is an independent computation dispatched to a process
pool; rows are put back in grid order before anything is written, so the
output does not depend on the number of workers.
"""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from enum import Enum
from pathlib import Path

import numpy as np
from pydantic import BaseModel, Field, model_validator

from fullnn import __version__
from fullnn.core.config import FullNNConfig, default_config
from fullnn.inflation.certify import certify_point
from fullnn.inflation.simulation import max_visibility_simulable
from fullnn.utils import utc_now_iso, write_json, write_text
from fullnn.witness import v_crit_numeric

logger = logging.getLogger(__name__)

CSV_DIGITS = 12


class ScanKind(str, Enum):
    SIM_VISIBILITY = "sim-visibility"
    WITNESS_THRESHOLD = "witness-threshold"
    CERTIFY_GRID = "certify-grid"


class ScanGrid(BaseModel):
    theta_min: float = 0.0
    theta_max: float = float(np.pi / 2)
    steps: int = 40

    @model_validator(mode="after")
    def _check(self) -> "ScanGrid":
        if self.steps < 0:
            raise ValueError("steps must be non-negative")
        if not 0.0 <= self.theta_min <= self.theta_max <= np.pi / 2 + 1e-12:
            raise ValueError("need 0 <= theta_min <= theta_max <= pi/2")
        return self

    def thetas(self) -> list[float]:
        """steps + 1 points including both ends."""
        if self.steps == 0:
            return [self.theta_min]
        return [float(t) for t in np.linspace(self.theta_min, self.theta_max, self.steps + 1)]


class ScanRow(BaseModel):
    theta: float
    value: float | None = None
    v: float | None = None
    verdict: str | None = None


class ScanResult(BaseModel):
    version: str = __version__
    created_at: str = Field(default_factory=utc_now_iso)
    kind: ScanKind
    grid: ScanGrid
    tol: float | None = None
    visibility: float | None = None
    tolerance: dict[str, float] = Field(default_factory=dict)
    rows: list[ScanRow] = Field(default_factory=list)

    def minimum(self) -> ScanRow:
        rows = [r for r in self.rows if r.value is not None]
        return min(rows, key=lambda r: r.value)  # type: ignore[arg-type, return-value]


def _scan_point(
    kind: ScanKind,
    theta: float,
    tol: float | None,
    visibility: float | None,
    config: FullNNConfig,
) -> ScanRow:
    if kind is ScanKind.SIM_VISIBILITY:
        return ScanRow(theta=theta, value=max_visibility_simulable(theta, tol, config))
    if kind is ScanKind.WITNESS_THRESHOLD:
        return ScanRow(theta=theta, value=v_crit_numeric(theta))
    v = 1.0 if visibility is None else visibility
    return ScanRow(theta=theta, v=v, verdict=certify_point(theta, v, config).value)


def run_scan(
    kind: ScanKind | str,
    grid: ScanGrid,
    *,
    tol: float | None = None,
    visibility: float | None = None,
    jobs: int | None = None,
    config: FullNNConfig | None = None,
) -> ScanResult:
    kind = ScanKind(kind)
    config = config or default_config()
    jobs = config.scan.jobs if jobs is None else jobs
    if jobs < 1:
        raise ValueError("jobs must be at least 1")
    if visibility is not None and not 0.0 <= visibility <= 1.0:
        raise ValueError(f"visibility must lie in [0, 1], got {visibility}")
    thetas = grid.thetas()
    logger.info("%s scan over %d points with %d worker(s)", kind.value, len(thetas), jobs)

    if jobs == 1:
        rows = [_scan_point(kind, t, tol, visibility, config) for t in thetas]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_scan_point, kind, t, tol, visibility, config) for t in thetas]
            rows = [f.result() for f in futures]

    return ScanResult(
        kind=kind,
        grid=grid,
        tol=tol,
        visibility=visibility,
        tolerance=config.tolerance.model_dump(),
        rows=rows,
    )


def _g(value: float | None) -> str:
    return "" if value is None else f"{value:.{CSV_DIGITS}g}"


def scan_to_csv(result: ScanResult) -> str:
    if result.kind is ScanKind.CERTIFY_GRID:
        lines = ["theta,v,verdict"]
        lines += [f"{_g(r.theta)},{_g(r.v)},{r.verdict}" for r in result.rows]
    else:
        lines = ["theta,value"]
        lines += [f"{_g(r.theta)},{_g(r.value)}" for r in result.rows]
    return "\n".join(lines) + "\n"


def write_scan(result: ScanResult, out: Path) -> Path:
    """Write the CSV and, next to it, the JSON echo of version and parameters."""
    write_text(out, scan_to_csv(result))
    meta = out.with_suffix(".json")
    write_json(meta, result.model_dump(mode="json"))
    return meta
