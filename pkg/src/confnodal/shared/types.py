"""Shared result types."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

import numpy as np
from numpy.typing import NDArray

from confnodal.shared.errors import IndexingError, NodalDataError

if TYPE_CHECKING:
    from confnodal.calculus import AlphaOrder, GridFunction


# --- Enums ---

class Direction(str, enum.Enum):
    FORWARD = "forward"
    BACKWARD = "backward"


class Provenance(str, enum.Enum):
    NUMERIC = "numeric"
    ASYMPTOTIC = "asymptotic"


class StepStatus(str, enum.Enum):
    OK = "ok"
    DEGENERATE = "degenerate"
    FAILED = "failed"
    SKIPPED = "skipped"


# --- Forward ---

@dataclass(frozen=True)
class ShotSolution:
    lam: float
    y: GridFunction
    dy: GridFunction
    direction: Direction

    def __call__(self, x):
        return self.y(x)


@dataclass(frozen=True)
class CharacteristicSample:
    lam: float
    delta: float
    delta_psi: float | None = None
    agrees: bool | None = None


@dataclass(frozen=True)
class SpectrumEntry:
    n: int
    lambda_n: float
    residual: float
    guess: float


@dataclass
class SpectrumRecord:
    alpha: float
    entries: list[SpectrumEntry] = field(default_factory=list)
    anomalies: list[dict[str, Any]] = field(default_factory=list)

    def __post_init__(self):
        self.entries.sort(key=lambda e: e.n)

    def get(self, n: int) -> SpectrumEntry:
        for e in self.entries:
            if e.n == n:
                return e
        raise IndexingError(n, len(self.entries), "index not present in the spectrum record")

    def __contains__(self, n: int) -> bool:
        return any(e.n == n for e in self.entries)

    @property
    def indices(self) -> list[int]:
        return [e.n for e in self.entries]

    @property
    def lambdas(self) -> NDArray[np.float64]:
        return np.array([e.lambda_n for e in self.entries])


@dataclass
class NodalSet:
    """Interior nodes per index; the implicit endpoints 0 and pi are never stored."""

    alpha: float
    entries: dict[int, NDArray[np.float64]] = field(default_factory=dict)
    provenance: Provenance = Provenance.NUMERIC
    report: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.entries = {int(n): np.asarray(v, dtype=float) for n, v in sorted(self.entries.items())}
        for n, nodes in self.entries.items():
            self._validate(n, nodes)

    @staticmethod
    def _validate(n: int, nodes: NDArray[np.float64]) -> None:
        if n == 0:
            raise NodalDataError("index n=0 is not an eigenvalue index")
        if nodes.size != abs(n) - 1:
            raise NodalDataError(f"index n={n} carries {nodes.size} nodes, expected {abs(n) - 1}")
        if nodes.size and (np.any(np.diff(nodes) <= 0)):
            raise NodalDataError(f"nodes of index n={n} are not strictly increasing")
        if nodes.size and (nodes[0] <= 0.0 or nodes[-1] >= math.pi):
            raise NodalDataError(f"nodes of index n={n} leave the open interval (0, pi)")

    def nodes(self, n: int) -> NDArray[np.float64]:
        try:
            return self.entries[n]
        except KeyError:
            raise NodalDataError(f"nodal data is missing index n={n}") from None

    def add(self, n: int, nodes: NDArray[np.float64]) -> None:
        nodes = np.asarray(nodes, dtype=float)
        self._validate(n, nodes)
        self.entries[n] = nodes
        self.entries = dict(sorted(self.entries.items()))

    @property
    def indices(self) -> list[int]:
        return list(self.entries)


# --- Inverse ---

@dataclass(frozen=True)
class NodalInput:
    alpha: AlphaOrder
    nodal_set: NodalSet
    n_use: int
    n_use2: int | None = None

    def __post_init__(self):
        if self.n_use < 8:
            raise NodalDataError(f"n_use must be >= 8, got {self.n_use}")
        if self.n_use2 is not None and self.n_use2 <= self.n_use:
            raise NodalDataError("n_use2 must exceed n_use")
        if not math.isclose(float(self.alpha), self.nodal_set.alpha, rel_tol=0, abs_tol=1e-12):
            raise NodalDataError(
                f"alpha mismatch: run uses {float(self.alpha):g}, nodes were computed for {self.nodal_set.alpha:g}"
            )

    @property
    def top(self) -> int:
        return self.n_use2 or 2 * self.n_use


@dataclass
class Step4Report:
    mean_q: float
    points: int
    dispersion: float
    iqr: float
    denominator_max: float
    endpoint_sum: float
    relative_spread: float = 0.0
    flagged: bool = False


@dataclass
class ReconstructionResult:
    alpha: float
    Q: GridFunction | None = None
    p: GridFunction | None = None
    f: GridFunction | None = None
    r: GridFunction | None = None
    g: GridFunction | None = None
    q: GridFunction | None = None
    mean_q: float | None = None
    status: dict[str, StepStatus] = field(default_factory=dict)
    diagnostics: dict[str, Any] = field(default_factory=dict)

    @property
    def complete(self) -> bool:
        return self.q is not None
