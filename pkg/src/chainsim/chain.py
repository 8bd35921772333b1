"""Chain geometry, coupling tables, model selection and initial deviation states.

Conventions used throughout the package:

* spins are numbered 1..N;
* couplings are angular frequencies and times are in their reciprocal, so every
  closed form depends only on the product ``d * t``;
* a coupling table is consumed verbatim by both engines (no hidden factors of 2).
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import InvalidChainError, InvalidStateError, UnsupportedModelError


class HamiltonianKind(enum.Enum):
    """Two-body interaction built over a coupling table."""

    DIPOLAR = "dipolar"
    XY = "xy"
    DQ = "dq"

    @classmethod
    def parse(cls, value: "str | HamiltonianKind") -> "HamiltonianKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(
                f"unknown Hamiltonian kind {value!r}; expected one of "
                + ", ".join(k.value for k in cls)
            ) from None


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float, copy=True)
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class CouplingTable:
    """Symmetric N x N table of pair couplings ``d[i, j]`` with zero diagonal.

    The array is stored 0-based (``d[0, 1]`` couples spins 1 and 2) and is
    read-only after construction.
    """

    d: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.d, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise InvalidChainError(f"coupling table must be square, got shape {d.shape}")
        if d.shape[0] < 2:
            raise InvalidChainError("a chain needs at least 2 spins")
        if not np.all(np.isfinite(d)):
            raise InvalidChainError("coupling table contains non-finite entries")
        if np.any(d != d.T):
            raise InvalidChainError("coupling table is not symmetric")
        if np.any(np.diag(d) != 0):
            raise InvalidChainError("coupling table has a nonzero diagonal")
        object.__setattr__(self, "d", _frozen(d))

    @property
    def n_spins(self) -> int:
        return self.d.shape[0]

    def coupling(self, i: int, j: int) -> float:
        """Coupling between spins ``i`` and ``j`` (1-based)."""
        return float(self.d[i - 1, j - 1])

    def pairs(self):
        """Yield ``(i, j, d_ij)`` for every coupled unordered pair, 0-based, i < j."""
        rows, cols = np.nonzero(np.triu(self.d, k=1))
        for i, j in zip(rows.tolist(), cols.tolist()):
            yield i, j, float(self.d[i, j])

    def is_nearest_neighbor(self) -> bool:
        """True when only |i - j| = 1 entries are nonzero."""
        n = self.n_spins
        i, j = np.indices((n, n))
        return not np.any(self.d[np.abs(i - j) != 1])

    def uniform_nn_coupling(self) -> float:
        """Return ``d`` for a uniform nearest-neighbor chain.

        Raises:
            UnsupportedModelError: the table has longer-range or non-uniform couplings.
        """
        if not self.is_nearest_neighbor():
            raise UnsupportedModelError(
                "closed-form engine requires nearest-neighbor couplings only; "
                "route long-range tables to the dense oracle"
            )
        bonds = np.diag(self.d, k=1)
        if np.any(bonds != bonds[0]) or bonds[0] == 0:
            raise UnsupportedModelError("closed-form engine requires a uniform nonzero coupling")
        return float(bonds[0])

    def __eq__(self, other):
        if not isinstance(other, CouplingTable):
            return NotImplemented
        return np.array_equal(self.d, other.d)

    def __hash__(self):
        return hash(self.d.tobytes())


def nearest_neighbor_couplings(n: int, d: float) -> CouplingTable:
    """Uniform chain: ``d[i, j] = d`` iff ``|i - j| = 1``."""
    if n < 2:
        raise InvalidChainError(f"a chain needs at least 2 spins, got n={n}")
    if d == 0:
        raise InvalidChainError("nearest-neighbor coupling must be nonzero")
    table = np.zeros((n, n))
    idx = np.arange(n - 1)
    table[idx, idx + 1] = d
    table[idx + 1, idx] = d
    return CouplingTable(table)


def dipolar_couplings(n: int, d: float, exponent: float = 3.0) -> CouplingTable:
    """All-pairs power law ``d / |i - j| ** exponent`` (exponent 3 is the dipolar case)."""
    if n < 2:
        raise InvalidChainError(f"a chain needs at least 2 spins, got n={n}")
    if not exponent > 0:
        raise InvalidChainError(f"exponent must be positive, got {exponent}")
    i = np.arange(n)
    sep = np.abs(i[:, None] - i[None, :]).astype(float)
    table = np.zeros((n, n))
    off = sep > 0
    table[off] = d / sep[off] ** exponent
    # Bitwise symmetry: the expression above is symmetric in (i, j) already.
    return CouplingTable(table)


@dataclass(frozen=True)
class ModeGrid:
    """Standing-wave momenta ``k_n = pi n / (N + 1)`` of an open chain."""

    n_spins: int
    k_values: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "k_values", _frozen(self.k_values))

    def __len__(self):
        return self.n_spins

    def mode_functions(self, sites=None) -> np.ndarray:
        """Orthonormal mode amplitudes ``sqrt(2/(N+1)) sin(k j)``.

        Returns an array indexed ``[site, mode]`` for the requested 1-based
        sites (all sites by default).
        """
        n = self.n_spins
        j = np.arange(1, n + 1) if sites is None else np.atleast_1d(np.asarray(sites))
        return np.sqrt(2.0 / (n + 1)) * np.sin(np.outer(j, self.k_values))


def mode_grid(n: int) -> ModeGrid:
    if n < 2:
        raise InvalidChainError(f"a chain needs at least 2 spins, got n={n}")
    return ModeGrid(n, np.pi * np.arange(1, n + 1) / (n + 1))


@dataclass(frozen=True)
class DeviationState:
    """Traceless initial state ``sum_a w_a sigma_z^a`` (1-based spin indices)."""

    weights: Mapping[int, float]

    def __post_init__(self):
        weights = {}
        for key, value in dict(self.weights).items():
            try:
                index = int(key)
            except (TypeError, ValueError):
                raise InvalidStateError(f"spin index {key!r} is not an integer") from None
            if isinstance(key, float) and key != index:
                raise InvalidStateError(f"spin index {key!r} is not an integer")
            weights[index] = weights.get(index, 0.0) + float(value)
        if not weights or not any(w != 0 for w in weights.values()):
            raise InvalidStateError("deviation state needs at least one nonzero weight")
        if min(weights) < 1:
            raise InvalidStateError(f"spin indices are 1-based, got {min(weights)}")
        object.__setattr__(self, "weights", dict(sorted(weights.items())))

    @classmethod
    def single(cls, a: int) -> "DeviationState":
        return cls({a: 1.0})

    @classmethod
    def chain_ends(cls, n: int) -> "DeviationState":
        """``sigma_z^1 + sigma_z^N``."""
        return cls({1: 1.0, n: 1.0})

    @classmethod
    def parse(cls, text: str) -> "DeviationState":
        """Parse ``"1,21"`` (unit weights) or ``"1:0.5,21:1"``."""
        weights: dict[int, float] = {}
        try:
            for item in text.split(","):
                item = item.strip()
                if not item:
                    continue
                if ":" in item:
                    idx, w = item.split(":", 1)
                    weights[int(idx)] = weights.get(int(idx), 0.0) + float(w)
                else:
                    weights[int(item)] = weights.get(int(item), 0.0) + 1.0
        except ValueError:
            raise InvalidStateError(f"cannot parse deviation state {text!r}") from None
        return cls(weights)

    def check(self, n: int) -> "DeviationState":
        """Raise :class:`InvalidStateError` unless every index lies in [1, n]."""
        bad = [a for a in self.weights if not 1 <= a <= n]
        if bad:
            raise InvalidStateError(f"spin indices {bad} outside chain of {n} spins")
        return self

    def vector(self, n: int) -> np.ndarray:
        """Dense weight vector of length n (0-based)."""
        self.check(n)
        w = np.zeros(n)
        for a, wa in self.weights.items():
            w[a - 1] = wa
        return w

    @property
    def is_single_spin(self) -> bool:
        return len(self.weights) == 1 and next(iter(self.weights.values())) == 1.0

    def label(self) -> str:
        return "+".join(
            f"z{a}" if w == 1.0 else f"{w:g}*z{a}" for a, w in self.weights.items()
        )


COUPLING_MODELS = ("nn", "dipolar")


@dataclass(frozen=True)
class ChainPreset:
    """Chain parameters as stored in a flat JSON preset file.

    Keys: ``n_spins``, ``model`` (``"nn"`` or ``"dipolar"``), ``d``,
    ``exponent`` and ``state`` (a ``{"index": weight}`` object or a
    ``"1,21"`` string).
    """

    n_spins: int
    model: str = "nn"
    d: float = 1.0
    exponent: float = 3.0
    state: DeviationState | None = None

    def table(self) -> CouplingTable:
        if self.model == "nn":
            return nearest_neighbor_couplings(self.n_spins, self.d)
        if self.model == "dipolar":
            return dipolar_couplings(self.n_spins, self.d, self.exponent)
        raise InvalidChainError(f"unknown coupling model {self.model!r}")

    def initial_state(self) -> DeviationState:
        state = self.state if self.state is not None else DeviationState.single(1)
        return state.check(self.n_spins)

    @classmethod
    def from_mapping(cls, raw: Mapping) -> "ChainPreset":
        state = raw.get("state")
        if isinstance(state, str):
            state = DeviationState.parse(state)
        elif isinstance(state, Mapping):
            state = DeviationState({int(k): float(v) for k, v in state.items()})
        elif state is not None:
            raise InvalidStateError(f"unsupported state description {state!r}")
        return cls(
            n_spins=int(raw["n_spins"]),
            model=str(raw.get("model", "nn")),
            d=float(raw.get("d", 1.0)),
            exponent=float(raw.get("exponent", 3.0)),
            state=state,
        )

    @classmethod
    def load(cls, path: "str | Path") -> "ChainPreset":
        return cls.from_mapping(json.loads(Path(path).read_text()))


def build_table(model: str, n: int, d: float = 1.0, exponent: float = 3.0) -> CouplingTable:
    """Coupling table for a named model (``"nn"`` or ``"dipolar"``)."""
    return ChainPreset(n_spins=n, model=model, d=d, exponent=exponent).table()
