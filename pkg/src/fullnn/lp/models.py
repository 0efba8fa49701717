"""Linear programs, Farkas certificates and solve results."""
from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import sparse


class MalformedLPError(ValueError):
    """Raised for programs whose shapes or coefficients are inconsistent."""


class LPInfeasibleError(RuntimeError):
    pass


class LPUnboundedError(RuntimeError):
    pass


class NumericalAmbiguityError(RuntimeError):
    """Raised when a result sits between the feasibility and certificate tolerances."""


class Relation(str, Enum):
    LE = "<="
    EQ = "="
    GE = ">="


@dataclass(frozen=True)
class LinearProgram:
    """Rows a_i . x (rel) rhs_i with x >= lower (default 0, -inf means free)."""

    matrix: sparse.csr_array = field(repr=False)
    relations: tuple[Relation, ...]
    rhs: np.ndarray = field(repr=False)
    lower: np.ndarray = field(repr=False)
    row_ids: tuple[str, ...] = ()
    objective: np.ndarray | None = field(default=None, repr=False)
    name: str = ""

    def __post_init__(self) -> None:
        m, n = self.matrix.shape
        if len(self.relations) != m or self.rhs.shape != (m,):
            raise MalformedLPError(f"{m} rows need {m} relations and right-hand sides")
        if self.lower.shape != (n,):
            raise MalformedLPError(f"lower bounds need {n} entries, got {self.lower.shape}")
        if self.row_ids and len(self.row_ids) != m:
            raise MalformedLPError("row ids must cover every row")
        if self.objective is not None and self.objective.shape != (n,):
            raise MalformedLPError(f"objective needs {n} entries")
        if not np.all(np.isfinite(self.matrix.data)) or not np.all(np.isfinite(self.rhs)):
            raise MalformedLPError("coefficients and right-hand sides must be finite")
        if np.any(np.isposinf(self.lower)) or np.any(np.isnan(self.lower)):
            raise MalformedLPError("lower bounds must be finite or -inf")

    @property
    def n_vars(self) -> int:
        return int(self.matrix.shape[1])

    @property
    def n_rows(self) -> int:
        return int(self.matrix.shape[0])

    def row_id(self, i: int) -> str:
        return self.row_ids[i] if self.row_ids else f"r{i}"

    def with_objective(self, objective: Sequence[float] | np.ndarray) -> "LinearProgram":
        return LinearProgram(
            self.matrix, self.relations, self.rhs, self.lower, self.row_ids,
            np.asarray(objective, dtype=float), self.name,
        )

    def scaled_rows(self, factor: float) -> "LinearProgram":
        return LinearProgram(
            sparse.csr_array(self.matrix * factor), self.relations, self.rhs * factor,
            self.lower, self.row_ids, self.objective, self.name,
        )


@dataclass(frozen=True)
class NormalizedLP:
    """Rows in >= / = form: ``a_hat x >= b_hat`` (or = where ``is_eq``)."""

    a_hat: sparse.csr_array = field(repr=False)
    b_hat: np.ndarray = field(repr=False)
    is_eq: np.ndarray = field(repr=False)
    lower: np.ndarray = field(repr=False)

    @property
    def shape(self) -> tuple[int, int]:
        return int(self.a_hat.shape[0]), int(self.a_hat.shape[1])


def normalize(lp: LinearProgram) -> NormalizedLP:
    signs = np.array([-1.0 if r is Relation.LE else 1.0 for r in lp.relations])
    a_hat = sparse.csr_array(sparse.diags_array(signs) @ lp.matrix)
    is_eq = np.array([r is Relation.EQ for r in lp.relations], dtype=bool)
    return NormalizedLP(a_hat, signs * lp.rhs, is_eq, np.asarray(lp.lower, dtype=float))


class LPBuilder:
    """Accumulates sparse rows; ``build`` freezes them into a LinearProgram."""

    def __init__(self, n_vars: int, name: str = "") -> None:
        self.n_vars = n_vars
        self.name = name
        self._rows: list[int] = []
        self._cols: list[int] = []
        self._vals: list[float] = []
        self._relations: list[Relation] = []
        self._rhs: list[float] = []
        self._ids: list[str] = []

    @property
    def n_rows(self) -> int:
        return len(self._rhs)

    def add_row(
        self,
        coefficients: Mapping[int, float],
        relation: Relation,
        rhs: float,
        row_id: str = "",
    ) -> int:
        i = len(self._rhs)
        for j, value in coefficients.items():
            if not 0 <= j < self.n_vars:
                raise MalformedLPError(f"column {j} outside 0..{self.n_vars - 1}")
            if value != 0.0:
                self._rows.append(i)
                self._cols.append(int(j))
                self._vals.append(float(value))
        self._relations.append(relation)
        self._rhs.append(float(rhs))
        self._ids.append(row_id or f"r{i}")
        return i

    def build(
        self,
        lower: np.ndarray | None = None,
        objective: np.ndarray | None = None,
    ) -> LinearProgram:
        matrix = sparse.coo_array(
            (
                np.asarray(self._vals, dtype=float),
                (np.asarray(self._rows, dtype=np.int64), np.asarray(self._cols, dtype=np.int64)),
            ),
            shape=(self.n_rows, self.n_vars),
        ).tocsr()
        matrix.sum_duplicates()
        return LinearProgram(
            matrix=matrix,
            relations=tuple(self._relations),
            rhs=np.asarray(self._rhs, dtype=float),
            lower=np.zeros(self.n_vars) if lower is None else np.asarray(lower, dtype=float),
            row_ids=tuple(self._ids),
            objective=objective,
            name=self.name,
        )


def lp_from_dense(
    rows: Sequence[Sequence[float]],
    relations: Sequence[str | Relation],
    rhs: Sequence[float],
    lower: Sequence[float] | None = None,
    objective: Sequence[float] | None = None,
) -> LinearProgram:
    """Small helper for hand-written programs."""
    dense = np.atleast_2d(np.asarray(rows, dtype=float))
    n = dense.shape[1]
    return LinearProgram(
        matrix=sparse.csr_array(dense),
        relations=tuple(Relation(r) for r in relations),
        rhs=np.asarray(rhs, dtype=float),
        lower=np.zeros(n) if lower is None else np.asarray(lower, dtype=float),
        row_ids=tuple(f"r{i}" for i in range(dense.shape[0])),
        objective=None if objective is None else np.asarray(objective, dtype=float),
    )


class SolveStatus(str, Enum):
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    AMBIGUOUS = "numerically_ambiguous"


@dataclass(frozen=True)
class FarkasCertificate:
    """Multipliers on the >= / = normalized rows (<= rows are negated)."""

    y: np.ndarray = field(repr=False)
    row_ids: tuple[str, ...] = ()

    def as_dict(self, threshold: float = 0.0) -> dict[str, float]:
        ids = self.row_ids or tuple(f"r{i}" for i in range(self.y.size))
        return {rid: float(v) for rid, v in zip(ids, self.y) if abs(v) > threshold}

    @classmethod
    def from_dict(cls, multipliers: Mapping[str, float], row_ids: Sequence[str]) -> "FarkasCertificate":
        index = {rid: i for i, rid in enumerate(row_ids)}
        y = np.zeros(len(row_ids))
        for rid, value in multipliers.items():
            if rid not in index:
                raise MalformedLPError(f"certificate names unknown row {rid!r}")
            y[index[rid]] = float(value)
        return cls(y, tuple(row_ids))


@dataclass(frozen=True)
class SolveResult:
    status: SolveStatus
    solution: np.ndarray | None = field(default=None, repr=False)
    certificate: FarkasCertificate | None = None
    iterations: int = 0
    residual: float = float("nan")
    phase1_value: float = float("nan")
    margin: float = float("nan")
    backend: str = ""

    @property
    def feasible(self) -> bool:
        return self.status is SolveStatus.FEASIBLE

    @property
    def infeasible(self) -> bool:
        return self.status is SolveStatus.INFEASIBLE
