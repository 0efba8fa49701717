"""Network scenarios, behaviors and correlators.

A Behavior stores p(outputs | inputs) as a dense array whose axes are all
party inputs (in declared party order) followed by all party outputs. Outputs
are the integers 0..k-1; every +1/-1 reading of an outcome lives in the sign
maps of a CorrelatorSpec.
"""
from __future__ import annotations

import json
import logging
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np
from pydantic import BaseModel, Field

from fullnn import __version__
from fullnn.utils import format_float

logger = logging.getLogger(__name__)

TOL_NEGATIVE = 1e-12
TOL_NORMALIZATION = 1e-10

# Vertices of the tetrahedron. Row i is the triple-bit reading of Bob's
# four-outcome index i; column y is the sign map of Bob's y-th bit.
TETRAHEDRON = np.array(
    [
        [1, 1, 1],
        [1, -1, -1],
        [-1, 1, -1],
        [-1, -1, 1],
    ],
    dtype=float,
)


class BehaviorValidationError(ValueError):
    """Raised when data does not describe a valid conditional distribution."""


class ScenarioMismatchError(ValueError):
    """Raised when an object is used with a scenario it does not fit."""


class Nature(str, Enum):
    CLASSICAL = "classical"
    NO_SIGNALING = "no-signaling"
    QUANTUM = "quantum"


@dataclass(frozen=True)
class Party:
    name: str
    inputs: int
    outputs: int


@dataclass(frozen=True)
class Source:
    parties: tuple[int, ...]
    nature: Nature = Nature.QUANTUM


@dataclass(frozen=True)
class Scenario:
    parties: tuple[Party, ...]
    sources: tuple[Source, ...] = ()

    def __post_init__(self) -> None:
        if not self.parties:
            raise ScenarioMismatchError("a scenario needs at least one party")
        names = [p.name for p in self.parties]
        if len(set(names)) != len(names):
            raise ScenarioMismatchError(f"duplicate party names: {names}")
        for party in self.parties:
            if party.inputs < 1 or party.outputs < 1:
                raise ScenarioMismatchError(
                    f"party {party.name!r} needs positive cardinalities, "
                    f"got inputs={party.inputs} outputs={party.outputs}"
                )
        covered: set[int] = set()
        for source in self.sources:
            for index in source.parties:
                if not 0 <= index < len(self.parties):
                    raise ScenarioMismatchError(f"source references party index {index}")
            covered.update(source.parties)
        if self.sources and covered != set(range(len(self.parties))):
            missing = [self.parties[i].name for i in range(len(self.parties)) if i not in covered]
            raise ScenarioMismatchError(f"parties not attached to any source: {missing}")

    @property
    def n_parties(self) -> int:
        return len(self.parties)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.parties)

    @property
    def input_shape(self) -> tuple[int, ...]:
        return tuple(p.inputs for p in self.parties)

    @property
    def output_shape(self) -> tuple[int, ...]:
        return tuple(p.outputs for p in self.parties)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.input_shape + self.output_shape

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ScenarioMismatchError(
                f"unknown party {name!r}; scenario has {list(self.names)}"
            ) from None

    def with_sources(self, natures: Sequence[Nature]) -> "Scenario":
        if len(natures) != len(self.sources):
            raise ScenarioMismatchError("one nature per source is required")
        return Scenario(
            self.parties,
            tuple(Source(s.parties, n) for s, n in zip(self.sources, natures)),
        )


def bilocal_scenario(
    alice_inputs: int = 2,
    charlie_inputs: int = 2,
    bob_outputs: int = 4,
    natures: tuple[Nature, Nature] = (Nature.QUANTUM, Nature.QUANTUM),
) -> Scenario:
    """A - B - C with sources (A, B) and (B, C); Bob has a fixed setting."""
    return Scenario(
        parties=(
            Party("A", alice_inputs, 2),
            Party("B", 1, bob_outputs),
            Party("C", charlie_inputs, 2),
        ),
        sources=(Source((0, 1), natures[0]), Source((1, 2), natures[1])),
    )


def ejm_scenario() -> Scenario:
    return bilocal_scenario(3, 3, 4)


def bsm_scenario() -> Scenario:
    return bilocal_scenario(2, 2, 3)


def star_scenario(n: int, natures: Sequence[Nature] | None = None) -> Scenario:
    """Branch parties A1..An (binary in/out) and the central party B (2**n outcomes)."""
    if n < 2:
        raise ScenarioMismatchError(f"a star network needs n >= 2 branches, got {n}")
    natures = list(natures) if natures is not None else [Nature.QUANTUM] * n
    if len(natures) != n:
        raise ScenarioMismatchError("one nature per branch source is required")
    parties = tuple(Party(f"A{k + 1}", 2, 2) for k in range(n)) + (Party("B", 1, 2**n),)
    sources = tuple(Source((k, n), natures[k]) for k in range(n))
    return Scenario(parties, sources)


def is_bilocal(scenario: Scenario) -> bool:
    return (
        scenario.names == ("A", "B", "C")
        and scenario.parties[1].inputs == 1
        and scenario.parties[0].outputs == 2
        and scenario.parties[2].outputs == 2
    )


def star_size(scenario: Scenario) -> int:
    """Number of branches of a star scenario; raises if it is not one."""
    n = scenario.n_parties - 1
    expected = tuple(f"A{k + 1}" for k in range(n)) + ("B",)
    if n < 2 or scenario.names != expected:
        raise ScenarioMismatchError(f"not a star scenario: {list(scenario.names)}")
    if scenario.parties[-1].inputs != 1 or scenario.parties[-1].outputs != 2**n:
        raise ScenarioMismatchError("the central party needs one input and 2**n outcomes")
    if any(p.inputs != 2 or p.outputs != 2 for p in scenario.parties[:-1]):
        raise ScenarioMismatchError("branch parties need binary inputs and outputs")
    return n


@dataclass(frozen=True)
class Behavior:
    scenario: Scenario
    data: np.ndarray = field(repr=False)

    @property
    def flat(self) -> np.ndarray:
        return self.data.reshape(-1)

    def marginal(self, keep: Sequence[str]) -> "Behavior":
        """Sum out the parties not in ``keep``; their inputs are fixed to 0."""
        keep_idx = [self.scenario.index(name) for name in keep]
        n = self.scenario.n_parties
        drop = [k for k in range(n) if k not in keep_idx]
        data = self.data.sum(axis=tuple(n + k for k in drop))
        slicer = tuple(0 if k in drop else slice(None) for k in range(n))
        data = data[slicer]
        scenario = Scenario(tuple(self.scenario.parties[k] for k in sorted(keep_idx)))
        return Behavior(scenario, _freeze(data))


def _freeze(values: np.ndarray) -> np.ndarray:
    values = np.array(values, dtype=float, copy=True)
    values.setflags(write=False)
    return values


def behavior_new(
    scenario: Scenario,
    data: Any,
    *,
    tol_neg: float = TOL_NEGATIVE,
    tol_norm: float = TOL_NORMALIZATION,
) -> Behavior:
    """Validate ``data`` against ``scenario`` and wrap it as a Behavior."""
    values = np.asarray(data, dtype=float)
    if values.size != scenario.size:
        raise BehaviorValidationError(
            f"data has {values.size} entries, scenario {scenario.shape} needs {scenario.size}"
        )
    values = values.reshape(scenario.shape)
    if not np.all(np.isfinite(values)):
        raise BehaviorValidationError("data contains non-finite entries")
    lowest = float(values.min())
    if lowest < -tol_neg:
        raise BehaviorValidationError(f"negative probability {lowest:.3e} beyond {tol_neg:.0e}")
    n = scenario.n_parties
    sums = values.sum(axis=tuple(range(n, 2 * n)))
    worst = float(np.max(np.abs(sums - 1.0)))
    if worst > tol_norm:
        raise BehaviorValidationError(
            f"normalization violated by {worst:.3e} (tolerance {tol_norm:.0e})"
        )
    return Behavior(scenario, _freeze(values))


def is_no_signaling(b: Behavior, tol: float = TOL_NORMALIZATION) -> bool:
    if not tol > 0:
        raise ValueError("tol must be positive")
    n = b.scenario.n_parties
    for k, party in enumerate(b.scenario.parties):
        if party.inputs == 1:
            continue
        rest = b.data.sum(axis=n + k)
        reference = np.take(rest, [0], axis=k)
        gap = float(np.max(np.abs(rest - reference)))
        if gap > tol:
            logger.debug("party %s signals (gap %.3e)", party.name, gap)
            return False
    return True


def mix(p: Behavior, q: Behavior, alpha: float) -> Behavior:
    if p.scenario.shape != q.scenario.shape:
        raise ScenarioMismatchError("cannot mix behaviors of different scenarios")
    return behavior_new(p.scenario, alpha * p.data + (1.0 - alpha) * q.data)


def uniform_behavior(scenario: Scenario) -> Behavior:
    data = np.full(scenario.shape, 1.0 / int(np.prod(scenario.output_shape)))
    return behavior_new(scenario, data)


# ---------------------------------------------------------------------------
# Correlators
# ---------------------------------------------------------------------------

_ALLOWED_SIGNS = (1.0, -1.0, 0.0)


@dataclass(frozen=True)
class PartyTerm:
    input: int
    signs: tuple[float, ...]

    def __post_init__(self) -> None:
        if any(s not in _ALLOWED_SIGNS for s in self.signs):
            raise ScenarioMismatchError(f"sign map values must be in {{+1, -1, 0}}: {self.signs}")


@dataclass(frozen=True)
class CorrelatorSpec:
    """Per-party (input, sign map); parties not listed are summed out."""

    terms: tuple[tuple[str, PartyTerm], ...] = ()

    @classmethod
    def of(cls, terms: Mapping[str, tuple[int, Iterable[float]]] | None = None) -> "CorrelatorSpec":
        items = []
        for name, (inp, signs) in (terms or {}).items():
            items.append((name, PartyTerm(int(inp), tuple(float(s) for s in signs))))
        return cls(tuple(sorted(items)))

    def as_dict(self) -> dict[str, PartyTerm]:
        return dict(self.terms)

    def to_json(self) -> dict[str, dict[str, Any]]:
        return {
            name: {"input": term.input, "signs": [int(s) for s in term.signs]}
            for name, term in self.terms
        }

    @classmethod
    def from_json(cls, payload: Mapping[str, Mapping[str, Any]]) -> "CorrelatorSpec":
        return cls.of({name: (entry["input"], entry["signs"]) for name, entry in payload.items()})


def signs_pm(outputs: int = 2) -> tuple[float, ...]:
    """(-1)**o for o in range(outputs)."""
    return tuple(float((-1) ** o) for o in range(outputs))


def indicator(outcome: int, outputs: int) -> tuple[float, ...]:
    return tuple(1.0 if o == outcome else 0.0 for o in range(outputs))


def bit_signs(mask: int, outputs: int) -> tuple[float, ...]:
    """(-1)**popcount(o & mask): the parity of the selected output bits."""
    return tuple(float((-1) ** bin(o & mask).count("1")) for o in range(outputs))


def tetra_signs(y: int) -> tuple[float, ...]:
    """Sign map of Bob's y-th bit (0-based) under the triple-bit convention."""
    return tuple(float(s) for s in TETRAHEDRON[:, y])


def correlator(b: Behavior, spec: CorrelatorSpec) -> float:
    scenario = b.scenario
    chosen = spec.as_dict()
    inputs: list[int] = []
    weights: list[np.ndarray] = []
    for name in chosen:
        scenario.index(name)
    for party in scenario.parties:
        term = chosen.get(party.name)
        if term is None:
            inputs.append(0)
            weights.append(np.ones(party.outputs))
            continue
        if not 0 <= term.input < party.inputs:
            raise ScenarioMismatchError(
                f"input {term.input} out of range for party {party.name!r} ({party.inputs} inputs)"
            )
        if len(term.signs) != party.outputs:
            raise ScenarioMismatchError(
                f"sign map for {party.name!r} has {len(term.signs)} entries, needs {party.outputs}"
            )
        inputs.append(term.input)
        weights.append(np.asarray(term.signs, dtype=float))
    out: Any = b.data[tuple(inputs)]
    for w in reversed(weights):
        out = out @ w
    return float(out)


# ---------------------------------------------------------------------------
# JSON form
# ---------------------------------------------------------------------------


class PartyDoc(BaseModel):
    name: str
    inputs: int
    outputs: int


class SourceDoc(BaseModel):
    parties: list[str]
    nature: Nature = Nature.QUANTUM


class ScenarioDoc(BaseModel):
    parties: list[PartyDoc]
    sources: list[SourceDoc] = Field(default_factory=list)


class BehaviorDoc(BaseModel):
    """On-disk Behavior: data in the documented index order."""

    scenario: ScenarioDoc
    meta: dict[str, Any] = Field(default_factory=dict)
    data: list[float]


def scenario_to_doc(scenario: Scenario) -> ScenarioDoc:
    return ScenarioDoc(
        parties=[PartyDoc(name=p.name, inputs=p.inputs, outputs=p.outputs) for p in scenario.parties],
        sources=[
            SourceDoc(parties=[scenario.parties[i].name for i in s.parties], nature=s.nature)
            for s in scenario.sources
        ],
    )


def scenario_from_doc(doc: ScenarioDoc) -> Scenario:
    parties = tuple(Party(p.name, p.inputs, p.outputs) for p in doc.parties)
    names = [p.name for p in parties]
    sources = []
    for s in doc.sources:
        try:
            sources.append(Source(tuple(names.index(n) for n in s.parties), s.nature))
        except ValueError:
            raise ScenarioMismatchError(f"source names unknown party: {s.parties}") from None
    return Scenario(parties, tuple(sources))


def behavior_to_json(b: Behavior, meta: Mapping[str, Any] | None = None) -> str:
    """Serialize with every probability written to 17 significant digits."""
    head = {
        "scenario": scenario_to_doc(b.scenario).model_dump(mode="json"),
        "meta": {"version": __version__, **dict(meta or {})},
    }
    text = json.dumps(head, indent=2)
    numbers = ", ".join(format_float(v) for v in b.flat)
    return text[:-2] + f',\n  "data": [{numbers}]\n}}\n'


def behavior_from_json(text: str) -> Behavior:
    doc = BehaviorDoc.model_validate_json(text)
    return behavior_new(scenario_from_doc(doc.scenario), doc.data)
