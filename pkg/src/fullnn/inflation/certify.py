from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from enum import Enum

from pydantic import BaseModel, Field

from fullnn import __version__
from fullnn.core.config import FullNNConfig, default_config
from fullnn.inflation.bilocal import (
    ClassicalSide,
    build_bilocal_inflation_lp,
    compile_inflation,
    inflation_spec,
)
from fullnn.inflation.witnesses import CertificateDoc, certificate_to_doc, certificate_value
from fullnn.lp.engine import solve_feasibility
from fullnn.lp.models import SolveStatus
from fullnn.quantum import ejm_correlations
from fullnn.scenario import Behavior, ScenarioDoc, scenario_to_doc
from fullnn.utils import sha256_array, utc_now_iso

logger = logging.getLogger(__name__)


class Verdict(str, Enum):
    CERTIFIED = "full-NN certified"
    NOT_CERTIFIED = "not certified"
    AMBIGUOUS = "ambiguous"


class OrientationReport(BaseModel):
    orientation: ClassicalSide
    status: SolveStatus
    backend: str = ""
    iterations: int = 0
    residual: float | None = None
    margin: float | None = None
    certificate_value: float | None = Field(
        default=None, description="y.b(p) re-evaluated from the symbolic right-hand side"
    )
    certificate: CertificateDoc | None = None


class FullNNReport(BaseModel):
    version: str = __version__
    created_at: str = Field(default_factory=utc_now_iso)
    behavior_sha256: str
    scenario: ScenarioDoc
    orientations: list[OrientationReport]
    verdict: Verdict

    @property
    def certified(self) -> bool:
        return self.verdict is Verdict.CERTIFIED

    def orientation(self, side: ClassicalSide | str) -> OrientationReport:
        side = ClassicalSide(side)
        return next(o for o in self.orientations if o.orientation is side)


def _finite(value: float) -> float | None:
    return value if math.isfinite(value) else None


def _solve_orientation(b: Behavior, side: ClassicalSide, config: FullNNConfig) -> OrientationReport:
    spec = inflation_spec(b.scenario, side)
    lp = build_bilocal_inflation_lp(b, side, config)
    result = solve_feasibility(lp, config)
    report = OrientationReport(
        orientation=side,
        status=result.status,
        backend=result.backend,
        iterations=result.iterations,
        residual=_finite(result.residual),
        margin=_finite(result.margin),
    )
    if result.status is not SolveStatus.INFEASIBLE or result.certificate is None:
        logger.info("%s orientation: %s", side.value, result.status.value)
        return report

    value = certificate_value(compile_inflation(spec), result.certificate, b)
    report.certificate_value = value
    if not value > 0.0:
        logger.warning(
            "%s certificate verified but y.b(p) = %.3e on the behavior; reporting ambiguity",
            side.value, value,
        )
        report.status = SolveStatus.AMBIGUOUS
        return report
    report.certificate = certificate_to_doc(
        result.certificate, spec, margin=value, behavior_sha256=sha256_array(b.data)
    )
    logger.info("%s orientation: infeasible, y.b(p) = %.6e", side.value, value)
    return report


def _verdict(orientations: list[OrientationReport]) -> Verdict:
    statuses = {o.status for o in orientations}
    if SolveStatus.FEASIBLE in statuses:
        return Verdict.NOT_CERTIFIED
    if SolveStatus.AMBIGUOUS in statuses:
        return Verdict.AMBIGUOUS
    return Verdict.CERTIFIED


def certify_full_nn(
    b: Behavior,
    config: FullNNConfig | None = None,
    *,
    parallel: bool = False,
) -> FullNNReport:
    """Run both source placements; certified only if both inflations are infeasible."""
    config = config or default_config()
    sides = list(ClassicalSide)
    if parallel:
        with ThreadPoolExecutor(max_workers=len(sides)) as pool:
            orientations = list(pool.map(lambda s: _solve_orientation(b, s, config), sides))
    else:
        orientations = [_solve_orientation(b, s, config) for s in sides]
    verdict = _verdict(orientations)
    logger.info("verdict: %s", verdict.value)
    return FullNNReport(
        behavior_sha256=sha256_array(b.data),
        scenario=scenario_to_doc(b.scenario),
        orientations=orientations,
        verdict=verdict,
    )


def certify_point(theta: float, v: float, config: FullNNConfig | None = None) -> Verdict:
    return certify_full_nn(ejm_correlations(theta, v), config).verdict


def certify_grid(
    thetas: list[float],
    visibility: float,
    config: FullNNConfig | None = None,
) -> list[tuple[float, float, Verdict]]:
    """(theta, v, verdict) for EJM correlations along a theta grid, in grid order."""
    return [(theta, visibility, certify_point(theta, visibility, config)) for theta in thetas]
