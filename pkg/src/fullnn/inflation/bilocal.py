"""Hybrid inflation of the bilocal network.

The classical source is cloned: its variable reaches both copies of the
shared party. The no-signaling source is duplicated together with both of
its endpoint devices. With Alice-Bob classical the inflated distribution is
p(a, b1, b2, c1, c2 | x, z1, z2); with Bob-Charlie classical it is
p(a1, a2, b1, b2, c | x1, x2, z). Each orientation has its own compiler.

Programs are compiled from the scenario alone. Marginal-matching rows keep a
symbolic right-hand side (a product of two observed probabilities) so the
same skeleton can be bound to any behavior, or read back as a witness.
"""
from __future__ import annotations

import itertools
import logging
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

import numpy as np

from fullnn.core.config import FullNNConfig, default_config
from fullnn.lp.models import LinearProgram, LPBuilder, Relation
from fullnn.scenario import (
    Behavior,
    Scenario,
    ScenarioMismatchError,
    is_bilocal,
    is_no_signaling,
)

logger = logging.getLogger(__name__)


class SignalingBehaviorError(ValueError):
    """Raised when an inflation is requested for a behavior that signals."""


class ClassicalSide(str, Enum):
    ALICE_BOB = "alice-bob"
    BOB_CHARLIE = "bob-charlie"


class VariableLayout:
    """A dense probability tensor laid out as inputs then outputs, flattened C-order."""

    def __init__(
        self,
        inputs: Sequence[tuple[str, int]],
        outputs: Sequence[tuple[str, int]],
    ) -> None:
        self.input_names = tuple(name for name, _ in inputs)
        self.output_names = tuple(name for name, _ in outputs)
        self.input_sizes = tuple(size for _, size in inputs)
        self.output_sizes = tuple(size for _, size in outputs)
        self.shape = self.input_sizes + self.output_sizes
        self.ids = np.arange(int(np.prod(self.shape)), dtype=np.int64).reshape(self.shape)

    @property
    def n_vars(self) -> int:
        return int(self.ids.size)

    @property
    def n_inputs(self) -> int:
        return len(self.input_sizes)

    def axis(self, name: str) -> int:
        if name in self.input_names:
            return self.input_names.index(name)
        return self.n_inputs + self.output_names.index(name)

    def label(self, var: int) -> str:
        coords = np.unravel_index(var, self.shape)
        ins = ",".join(str(int(c)) for c in coords[: self.n_inputs])
        outs = ",".join(str(int(c)) for c in coords[self.n_inputs:])
        return f"{outs}|{ins}"

    def input_assignments(self) -> Iterator[tuple[int, ...]]:
        return itertools.product(*(range(n) for n in self.input_sizes))

    def add_normalization(self, builder: LPBuilder) -> None:
        flat = self.ids.reshape(int(np.prod(self.input_sizes)), -1)
        for inputs, row in zip(self.input_assignments(), flat):
            tag = ",".join(map(str, inputs))
            builder.add_row({int(j): 1.0 for j in row}, Relation.EQ, 1.0, f"norm[{tag}]")

    def add_no_signaling(self, builder: LPBuilder, input_name: str, output_name: str) -> None:
        """Summing ``output_name`` out leaves a table independent of ``input_name``.

        Consecutive inputs are related, which implies every pair.
        """
        k = self.axis(input_name)
        m = self.axis(output_name) - 1  # position after the input axis is removed
        for s in range(self.shape[k] - 1):
            lo = np.moveaxis(np.take(self.ids, s, axis=k), m, -1)
            hi = np.moveaxis(np.take(self.ids, s + 1, axis=k), m, -1)
            for rest in np.ndindex(*lo.shape[:-1]):
                coeffs = {int(j): 1.0 for j in lo[rest]}
                coeffs.update({int(j): -1.0 for j in hi[rest]})
                tag = ",".join(map(str, rest))
                builder.add_row(coeffs, Relation.EQ, 0.0, f"ns-{output_name}[{s}:{s + 1}|{tag}]")

    def add_symmetry(self, builder: LPBuilder, swaps: Sequence[tuple[str, str]]) -> int:
        """p(v) = p(sigma v) for the involution exchanging each named axis pair."""
        perm = list(range(len(self.shape)))
        for left, right in swaps:
            i, j = self.axis(left), self.axis(right)
            if self.shape[i] != self.shape[j]:
                raise ScenarioMismatchError(f"cannot exchange {left!r} and {right!r}: sizes differ")
            perm[i], perm[j] = j, i
        image = np.transpose(self.ids, perm).reshape(-1)
        added = 0
        for var, partner in enumerate(image):
            if var < partner:
                builder.add_row(
                    {var: 1.0, int(partner): -1.0}, Relation.EQ, 0.0,
                    f"sym[{self.label(var)}]",
                )
                added += 1
        return added


@dataclass(frozen=True)
class Event:
    """p(outputs | inputs) of ``parties`` in the original network, others summed out."""

    parties: tuple[str, ...]
    inputs: tuple[int, ...]
    outputs: tuple[int, ...]


@dataclass(frozen=True)
class MarginalRow:
    row: int
    first: Event
    second: Event


@dataclass(frozen=True)
class InflationSpec:
    scenario: Scenario
    side: ClassicalSide

    def __post_init__(self) -> None:
        if not is_bilocal(self.scenario):
            raise ScenarioMismatchError(
                f"inflation needs a bilocal A-B-C scenario, got {list(self.scenario.names)}"
            )

    @property
    def classical_source(self) -> tuple[str, str]:
        return ("A", "B") if self.side is ClassicalSide.ALICE_BOB else ("B", "C")

    @property
    def duplicated_parties(self) -> tuple[str, ...]:
        """Parties present twice in the inflation (the ends of the no-signaling source)."""
        return ("B", "C") if self.side is ClassicalSide.ALICE_BOB else ("A", "B")


@dataclass(frozen=True)
class InflationProgram:
    """An inflation LP whose marginal rows carry symbolic right-hand sides."""

    spec: InflationSpec
    layout: VariableLayout = field(repr=False)
    lp: LinearProgram = field(repr=False)
    marginal_rows: tuple[MarginalRow, ...] = field(repr=False)

    def rhs(self, b: Behavior) -> np.ndarray:
        tables = _event_tables(b, self.marginal_rows)
        rhs = np.array(self.lp.rhs, copy=True)
        for m in self.marginal_rows:
            rhs[m.row] = _event_value(tables, m.first) * _event_value(tables, m.second)
        return rhs

    def bind(self, b: Behavior) -> LinearProgram:
        if b.scenario.shape != self.spec.scenario.shape:
            raise ScenarioMismatchError(
                f"behavior shape {b.scenario.shape} does not fit {self.spec.scenario.shape}"
            )
        return LinearProgram(
            self.lp.matrix, self.lp.relations, self.rhs(b), self.lp.lower,
            self.lp.row_ids, None, self.lp.name,
        )


def _event_tables(b: Behavior, rows: Sequence[MarginalRow]) -> dict[tuple[str, ...], np.ndarray]:
    wanted = {m.first.parties for m in rows} | {m.second.parties for m in rows}
    return {parties: b.marginal(parties).data for parties in wanted}


def _event_value(tables: dict[tuple[str, ...], np.ndarray], event: Event) -> float:
    return float(tables[event.parties][event.inputs + event.outputs])


def _compile_alice_bob_classical(spec: InflationSpec) -> InflationProgram:
    """Copies B1-C1 and B2-C2 of the no-signaling source; lambda reaches B1 and B2."""
    a_party, b_party, c_party = spec.scenario.parties
    layout = VariableLayout(
        inputs=[("x", a_party.inputs), ("z1", c_party.inputs), ("z2", c_party.inputs)],
        outputs=[
            ("a", a_party.outputs),
            ("b1", b_party.outputs),
            ("b2", b_party.outputs),
            ("c1", c_party.outputs),
            ("c2", c_party.outputs),
        ],
    )
    builder = LPBuilder(layout.n_vars, name=f"inflation-{spec.side.value}")
    layout.add_normalization(builder)
    layout.add_no_signaling(builder, "x", "a")
    layout.add_no_signaling(builder, "z1", "c1")
    layout.add_no_signaling(builder, "z2", "c2")
    layout.add_symmetry(builder, [("b1", "b2"), ("c1", "c2"), ("z1", "z2")])

    marginals: list[MarginalRow] = []
    summed = layout.axis("b2")
    ids = np.moveaxis(layout.ids, summed, -1)
    # remaining axes: x, z1, z2, a, b1, c1, c2
    for x, z1, z2, a, b1, c1, c2 in np.ndindex(*ids.shape[:-1]):
        row = builder.add_row(
            {int(j): 1.0 for j in ids[x, z1, z2, a, b1, c1, c2]},
            Relation.EQ,
            0.0,
            f"marg[{a},{b1},{c1},{c2}|{x},{z1},{z2}]",
        )
        marginals.append(
            MarginalRow(
                row,
                Event(("A", "B", "C"), (x, 0, z1), (a, b1, c1)),
                Event(("C",), (z2,), (c2,)),
            )
        )
    return InflationProgram(spec, layout, builder.build(), tuple(marginals))


def _compile_bob_charlie_classical(spec: InflationSpec) -> InflationProgram:
    """Copies A1-B1 and A2-B2 of the no-signaling source; mu reaches B1 and B2."""
    a_party, b_party, c_party = spec.scenario.parties
    layout = VariableLayout(
        inputs=[("x1", a_party.inputs), ("x2", a_party.inputs), ("z", c_party.inputs)],
        outputs=[
            ("a1", a_party.outputs),
            ("a2", a_party.outputs),
            ("b1", b_party.outputs),
            ("b2", b_party.outputs),
            ("c", c_party.outputs),
        ],
    )
    builder = LPBuilder(layout.n_vars, name=f"inflation-{spec.side.value}")
    layout.add_normalization(builder)
    layout.add_no_signaling(builder, "x1", "a1")
    layout.add_no_signaling(builder, "x2", "a2")
    layout.add_no_signaling(builder, "z", "c")
    layout.add_symmetry(builder, [("a1", "a2"), ("b1", "b2"), ("x1", "x2")])

    marginals: list[MarginalRow] = []
    summed = layout.axis("b2")
    ids = np.moveaxis(layout.ids, summed, -1)
    # remaining axes: x1, x2, z, a1, a2, b1, c
    for x1, x2, z, a1, a2, b1, c in np.ndindex(*ids.shape[:-1]):
        row = builder.add_row(
            {int(j): 1.0 for j in ids[x1, x2, z, a1, a2, b1, c]},
            Relation.EQ,
            0.0,
            f"marg[{a1},{a2},{b1},{c}|{x1},{x2},{z}]",
        )
        marginals.append(
            MarginalRow(
                row,
                Event(("A", "B", "C"), (x1, 0, z), (a1, b1, c)),
                Event(("A",), (x2,), (a2,)),
            )
        )
    return InflationProgram(spec, layout, builder.build(), tuple(marginals))


@lru_cache(maxsize=16)
def compile_inflation(spec: InflationSpec) -> InflationProgram:
    if spec.side is ClassicalSide.ALICE_BOB:
        program = _compile_alice_bob_classical(spec)
    else:
        program = _compile_bob_charlie_classical(spec)
    logger.info(
        "compiled %s: %d variables, %d rows (%d marginal)",
        program.lp.name, program.lp.n_vars, program.lp.n_rows, len(program.marginal_rows),
    )
    return program


def inflation_spec(scenario: Scenario, side: ClassicalSide | str) -> InflationSpec:
    """Spec keyed on the parties only, so behaviors differing in source natures share programs."""
    return InflationSpec(Scenario(scenario.parties, ()), ClassicalSide(side))


def build_bilocal_inflation_lp(
    b: Behavior,
    side: ClassicalSide | str,
    config: FullNNConfig | None = None,
) -> LinearProgram:
    config = config or default_config()
    if not is_bilocal(b.scenario):
        raise ScenarioMismatchError("the inflation compilers need a bilocal behavior")
    if not is_no_signaling(b, config.tolerance.no_signaling):
        raise SignalingBehaviorError("refusing to inflate a signaling behavior")
    return compile_inflation(inflation_spec(b.scenario, side)).bind(b)
