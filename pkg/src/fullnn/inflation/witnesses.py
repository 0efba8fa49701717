"""Farkas certificates of inflation programs, on disk and as witness polynomials.

For a certificate y, y.b(p) is the sum of the normalization multipliers
plus, per marginal row, y_r P(first) P(second). Rows are grouped by their
input settings and each party's outcome axis is rewritten in the character
basis chi_k(o) = (-1)**popcount(k & o) (indicators when the outcome count is
not a power of two), which turns probability products into products of
correlators. Trivial characters drop out of a correlator.
"""
from __future__ import annotations

import json
import logging
from collections import defaultdict
from collections.abc import Mapping
from typing import Any

import numpy as np
from pydantic import BaseModel, Field

from fullnn import __version__
from fullnn.core.config import FullNNConfig, default_config
from fullnn.inflation.bilocal import (
    ClassicalSide,
    Event,
    InflationProgram,
    InflationSpec,
    compile_inflation,
    inflation_spec,
)
from fullnn.lp.engine import check_dual
from fullnn.lp.models import FarkasCertificate
from fullnn.scenario import (
    Behavior,
    CorrelatorSpec,
    ScenarioDoc,
    ScenarioMismatchError,
    indicator,
    scenario_from_doc,
    scenario_to_doc,
)
from fullnn.utils import utc_now_iso
from fullnn.witness import Direction, WitnessExpr, WitnessTerm

logger = logging.getLogger(__name__)

COEF_CUTOFF = 1e-12


class UnverifiedCertificateError(ValueError):
    """Raised when multipliers fail the Farkas dual conditions of their program."""


class CertificateDoc(BaseModel):
    """A certificate re-verifiable without this toolkit: rebuild the rows, check y.A and y.b."""

    version: str = __version__
    created_at: str = Field(default_factory=utc_now_iso)
    orientation: ClassicalSide
    scenario: ScenarioDoc
    multipliers: dict[str, float]
    margin: float | None = None
    behavior_sha256: str | None = None


def certificate_to_doc(
    cert: FarkasCertificate,
    spec: InflationSpec,
    *,
    margin: float | None = None,
    behavior_sha256: str | None = None,
) -> CertificateDoc:
    return CertificateDoc(
        orientation=spec.side,
        scenario=scenario_to_doc(spec.scenario),
        multipliers=cert.as_dict(),
        margin=margin,
        behavior_sha256=behavior_sha256,
    )


def certificate_from_doc(doc: CertificateDoc) -> tuple[FarkasCertificate, InflationSpec]:
    spec = inflation_spec(scenario_from_doc(doc.scenario), doc.orientation)
    program = compile_inflation(spec)
    return FarkasCertificate.from_dict(doc.multipliers, program.lp.row_ids), spec


def certificate_value(program: InflationProgram, cert: FarkasCertificate, b: Behavior) -> float:
    """y.b(p): every row here is an equality and every variable has lower bound 0."""
    return float(np.asarray(cert.y) @ program.rhs(b))


def _characters(outputs: int) -> tuple[np.ndarray, list[tuple[float, ...] | None]]:
    """Change of basis matrix and the sign map of each basis element (None = trivial)."""
    if outputs & (outputs - 1) == 0:
        chars = np.array(
            [[(-1) ** bin(k & o).count("1") for o in range(outputs)] for k in range(outputs)],
            dtype=float,
        )
        maps: list[tuple[float, ...] | None] = [None] + [tuple(row) for row in chars[1:]]
        return chars / outputs, maps
    return np.eye(outputs), [indicator(o, outputs) for o in range(outputs)]


def _spec_key(spec: CorrelatorSpec) -> str:
    return json.dumps(spec.to_json(), sort_keys=True)


def _event_correlator(
    event: Event,
    chars: tuple[int, ...],
    maps: Mapping[str, list[tuple[float, ...] | None]],
) -> CorrelatorSpec:
    terms: dict[str, tuple[int, Any]] = {}
    for party, inp, k in zip(event.parties, event.inputs, chars):
        sign_map = maps[party][k]
        if sign_map is not None:
            terms[party] = (inp, sign_map)
    return CorrelatorSpec.of(terms)


def certificate_to_witness(
    cert: FarkasCertificate,
    spec: InflationSpec,
    config: FullNNConfig | None = None,
) -> WitnessExpr:
    """Witness whose value on p is y.b(p); behaviors with the hybrid model give <= 0."""
    config = config or default_config()
    program = compile_inflation(spec)
    lp = program.lp
    if cert.row_ids and tuple(cert.row_ids) != lp.row_ids:
        cert = FarkasCertificate.from_dict(cert.as_dict(), lp.row_ids)
    y = np.asarray(cert.y, dtype=float)
    if y.shape != (lp.n_rows,):
        raise UnverifiedCertificateError(f"certificate has {y.size} multipliers, program has {lp.n_rows} rows")
    if not check_dual(lp, y, config.tolerance.certificate_dual):
        raise UnverifiedCertificateError("multipliers do not satisfy the dual conditions of the program")

    parties = spec.scenario.parties
    bases = {p.name: _characters(p.outputs) for p in parties}
    maps = {name: basis[1] for name, basis in bases.items()}

    # the skeleton stores 0 on marginal rows, so this is the normalization part alone
    constant = float(y @ lp.rhs)

    blocks: dict[tuple[Event, Event], dict[tuple[int, ...], float]] = defaultdict(dict)
    for m in program.marginal_rows:
        if y[m.row] == 0.0:
            continue
        first = Event(m.first.parties, m.first.inputs, ())
        second = Event(m.second.parties, m.second.inputs, ())
        blocks[(first, second)][m.first.outputs + m.second.outputs] = float(y[m.row])

    coefficients: dict[tuple[str, ...], float] = defaultdict(float)
    factors_by_key: dict[tuple[str, ...], tuple[CorrelatorSpec, ...]] = {}
    coefficients[()] += constant
    for (first, second), entries in blocks.items():
        axis_parties = first.parties + second.parties
        tensor = np.zeros(tuple(spec.scenario.parties[spec.scenario.index(p)].outputs for p in axis_parties))
        for outs, value in entries.items():
            tensor[outs] = value
        for axis, party in enumerate(axis_parties):
            tensor = np.moveaxis(np.tensordot(bases[party][0], tensor, axes=([1], [axis])), 0, axis)
        n_first = len(first.parties)
        for chars in zip(*np.nonzero(np.abs(tensor) > 0.0)):
            coef = float(tensor[chars])
            f1 = _event_correlator(first, tuple(int(k) for k in chars[:n_first]), maps)
            f2 = _event_correlator(second, tuple(int(k) for k in chars[n_first:]), maps)
            factors = tuple(sorted((f for f in (f1, f2) if f.terms), key=_spec_key))
            key = tuple(_spec_key(f) for f in factors)
            coefficients[key] += coef
            factors_by_key[key] = factors

    scale = max((abs(c) for c in coefficients.values()), default=0.0)
    terms = []
    for key in sorted(coefficients):
        coef = coefficients[key]
        if abs(coef) <= COEF_CUTOFF * scale:
            continue
        factors = factors_by_key.get(key) or (CorrelatorSpec(),)
        terms.append(WitnessTerm(coef, factors))
    logger.info("certificate of %s reduced to %d witness terms", spec.side.value, len(terms))
    return WitnessExpr(tuple(terms), 0.0, Direction.LE, f"inflation-{spec.side.value}")


def check_certificate_scenario(doc: CertificateDoc, b: Behavior) -> None:
    if tuple(p.name for p in doc.scenario.parties) != b.scenario.names or (
        scenario_from_doc(doc.scenario).shape != b.scenario.shape
    ):
        raise ScenarioMismatchError("certificate and behavior belong to different scenarios")
