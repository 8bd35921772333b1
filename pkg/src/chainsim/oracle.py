"""Brute-force 2^N Hilbert-space engine.

Basis states are bit strings with spin 1 as the most significant bit; bit 0 is
spin up (``sigma_z = +1``). Every Hamiltonian here is real symmetric.

Coherence order of ``|m><n|`` is ``M_m - M_n`` with ``M = sum_j sigma_z^j / 2``,
so ``sigma^+`` carries order +1.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .chain import CouplingTable, HamiltonianKind
from .errors import AliasingError, InvalidInputError, ResourceLimitError
from .series import TimeSeries

DEFAULT_ORACLE_CAP = 12
DEFAULT_PHASE_STEPS = 8


def oracle_cap() -> int:
    """Largest chain the oracle accepts (env ``CHAINSIM_ORACLE_CAP`` overrides)."""
    raw = os.environ.get("CHAINSIM_ORACLE_CAP")
    if raw is None:
        return DEFAULT_ORACLE_CAP
    try:
        return int(raw)
    except ValueError:
        raise ResourceLimitError(f"CHAINSIM_ORACLE_CAP={raw!r} is not an integer") from None


def check_cap(n: int, cap: int | None = None):
    cap = oracle_cap() if cap is None else cap
    if n > cap:
        raise ResourceLimitError(
            f"dense oracle limited to {cap} spins (2^{cap} states), got {n}"
        )


def _bits(n: int) -> np.ndarray:
    """``bits[j, m]`` is the occupation bit of spin j+1 in basis state m (1 = down)."""
    idx = np.arange(2**n)
    return (idx[None, :] >> (n - 1 - np.arange(n))[:, None]) & 1


def z_values(n: int) -> np.ndarray:
    """``sigma_z`` eigenvalue of every spin in every basis state, shape (n, 2^n)."""
    return 1 - 2 * _bits(n)


def coherence_orders(n: int) -> np.ndarray:
    """Matrix of coherence orders ``q[m, n]`` for the 2^n basis."""
    pop = _bits(n).sum(axis=0)
    return pop[None, :] - pop[:, None]


@dataclass(frozen=True, eq=False)
class SpinOperator:
    """Full 2^N x 2^N matrix on a chain of ``n_spins`` spins-1/2.

    ``max_order`` records the highest coherence order the operator can build
    from a population (z-diagonal) state when used as a Hamiltonian; ``None``
    means unknown.
    """

    n_spins: int
    matrix: np.ndarray
    max_order: int | None = None

    def __post_init__(self):
        dim = 2**self.n_spins
        if self.matrix.shape != (dim, dim):
            raise InvalidInputError(
                f"operator on {self.n_spins} spins must be {dim}x{dim}, got {self.matrix.shape}"
            )

    @property
    def dim(self) -> int:
        return 2**self.n_spins

    def dagger(self) -> "SpinOperator":
        return SpinOperator(self.n_spins, self.matrix.conj().T)

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def normalized_trace(self) -> complex:
        return complex(np.trace(self.matrix)) / self.dim

    def inner(self, other: "SpinOperator") -> complex:
        """Normalized Hilbert-Schmidt product ``Tr(A^dagger B) / 2^N``."""
        return complex(np.vdot(self.matrix, other.matrix)) / self.dim

    def __add__(self, other: "SpinOperator") -> "SpinOperator":
        return SpinOperator(self.n_spins, self.matrix + other.matrix)

    def __sub__(self, other: "SpinOperator") -> "SpinOperator":
        return SpinOperator(self.n_spins, self.matrix - other.matrix)

    def __rmul__(self, scalar) -> "SpinOperator":
        return SpinOperator(self.n_spins, scalar * self.matrix)

    def __matmul__(self, other: "SpinOperator") -> "SpinOperator":
        return SpinOperator(self.n_spins, self.matrix @ other.matrix)

    def is_diagonal(self) -> bool:
        m = self.matrix
        return not np.any(m - np.diag(np.diag(m)))

    @cached_property
    def propagator(self) -> "Propagator":
        return Propagator(self.matrix)


class Propagator:
    """Eigendecomposition of a Hermitian matrix, computed once per connected block.

    Block structure (magnetization sectors and the like) is found from the
    sparsity graph, so a 12-spin chain never diagonalizes a 4096 x 4096 matrix
    unless the Hamiltonian really mixes every state.
    """

    def __init__(self, matrix: np.ndarray):
        self.dim = matrix.shape[0]
        n_blocks, labels = connected_components(csr_matrix(matrix != 0), directed=False)
        self.blocks = []
        for b in range(n_blocks):
            idx = np.flatnonzero(labels == b)
            energies, vectors = np.linalg.eigh(matrix[np.ix_(idx, idx)])
            self.blocks.append((idx, energies, vectors))
        self.labels = labels

    def eigenvalues(self) -> np.ndarray:
        return np.sort(np.concatenate([e for _, e, _ in self.blocks]))

    def block_unitaries(self, t: float):
        """``[(indices, exp(-i H_b t))]`` for every connected block."""
        return [
            (idx, (vectors * np.exp(-1j * energies * t)) @ vectors.conj().T)
            for idx, energies, vectors in self.blocks
        ]

    def unitary(self, t: float) -> np.ndarray:
        """``exp(-i H t)`` as a dense matrix."""
        U = np.zeros((self.dim, self.dim), dtype=complex)
        for idx, block in self.block_unitaries(t):
            U[np.ix_(idx, idx)] = block
        return U

    def block_diagonal(self, m: np.ndarray) -> bool:
        rows, cols = np.nonzero(m)
        return bool(np.all(self.labels[rows] == self.labels[cols]))

    def expectation_series(self, rho0: np.ndarray, observable: np.ndarray, times) -> np.ndarray:
        """``Tr(rho(t) O) / 2^N`` on a time grid without forming rho(t).

        Works in the eigenbasis: each time point costs one elementwise pass over
        the (block-diagonal) transformed operators.
        """
        times = np.asarray(times, dtype=float)
        out = np.zeros(times.shape)
        if self.block_diagonal(rho0) and self.block_diagonal(observable):
            pieces = [
                (e, v, rho0[np.ix_(idx, idx)], observable[np.ix_(idx, idx)])
                for idx, e, v in self.blocks
            ]
        else:
            energies, vectors = self._dense_basis()
            pieces = [(energies, vectors, rho0, observable)]
        for energies, vectors, rho_b, obs_b in pieces:
            rt = vectors.conj().T @ rho_b @ vectors
            ot = vectors.conj().T @ obs_b @ vectors
            weights = rt * ot.T
            keep = weights != 0
            w = weights[keep]
            omega = (energies[:, None] - energies[None, :])[keep]
            for i, t in enumerate(times.ravel()):
                out.flat[i] += np.real(np.sum(w * np.exp(-1j * omega * t)))
        return out / self.dim

    def _dense_basis(self):
        energies = np.concatenate([e for _, e, _ in self.blocks])
        vectors = np.zeros((self.dim, self.dim))
        offset = 0
        for idx, _, v in self.blocks:
            vectors = vectors.astype(np.result_type(vectors, v), copy=False)
            vectors[np.ix_(idx, np.arange(offset, offset + len(idx)))] = v
            offset += len(idx)
        return energies, vectors

    def evolve(self, rho0: np.ndarray, t: float) -> np.ndarray:
        U = self.unitary(t)
        return U @ rho0 @ U.conj().T


def _check_table(table: CouplingTable, cap: int | None):
    d = np.asarray(table.d)
    if np.any(d != d.T):
        raise InvalidInputError("coupling table is not symmetric")
    check_cap(table.n_spins, cap)


def build_hamiltonian(kind, table: CouplingTable, cap: int | None = None) -> SpinOperator:
    """Dipolar, XY or DQ Hamiltonian summed once over every coupled pair i < j.

    * Dipolar: ``d_ij [Z Z - (X X + Y Y) / 2]``
    * XY: ``d_ij / 2 (X X + Y Y)``, a flip-flop of amplitude ``d_ij``
    * DQ: ``d_ij / 2 (X X - Y Y)``, a flip-flip of amplitude ``d_ij``
    """
    kind = HamiltonianKind.parse(kind)
    _check_table(table, cap)
    n = table.n_spins
    dim = 2**n
    idx = np.arange(dim)
    bits = _bits(n)
    H = np.zeros((dim, dim))
    for i, j, d in table.pairs():
        mask = (1 << (n - 1 - i)) | (1 << (n - 1 - j))
        flipped = idx ^ mask
        aligned = bits[i] == bits[j]
        if kind is HamiltonianKind.XY:
            H[flipped[~aligned], idx[~aligned]] += d
        elif kind is HamiltonianKind.DQ:
            H[flipped[aligned], idx[aligned]] += d
        else:
            H[idx, idx] += d * np.where(aligned, 1.0, -1.0)
            H[flipped[~aligned], idx[~aligned]] -= d
    if kind is HamiltonianKind.DQ:
        max_order = 2 if table.is_nearest_neighbor() else n
    else:
        max_order = 0
    op = SpinOperator(n, H, max_order=max_order)
    if op.hermiticity_error() >= 1e-14:
        raise InvalidInputError("assembled Hamiltonian is not Hermitian")
    return op


def sigma_z(n: int, a: int) -> SpinOperator:
    return SpinOperator(n, np.diag(z_values(n)[a - 1].astype(float)))


def _flip(n: int, a: int, amplitude) -> SpinOperator:
    dim = 2**n
    idx = np.arange(dim)
    M = np.zeros((dim, dim), dtype=complex)
    M[idx ^ (1 << (n - a)), idx] = amplitude(_bits(n)[a - 1])
    return SpinOperator(n, M)


def sigma_x(n: int, a: int) -> SpinOperator:
    return _flip(n, a, lambda bit: np.ones(bit.shape))


def sigma_y(n: int, a: int) -> SpinOperator:
    # Y|up> = i|down>, Y|down> = -i|up>
    return _flip(n, a, lambda bit: np.where(bit == 0, 1j, -1j))


def sigma_plus(n: int, a: int) -> SpinOperator:
    return _flip(n, a, lambda bit: (bit == 1).astype(float))


def sigma_minus(n: int, a: int) -> SpinOperator:
    return _flip(n, a, lambda bit: (bit == 0).astype(float))


def deviation_operator(state, n: int) -> SpinOperator:
    """``sum_a w_a sigma_z^a`` as a diagonal operator."""
    w = state.vector(n)
    return SpinOperator(n, np.diag(w @ z_values(n).astype(float)))


def total_z(n: int) -> SpinOperator:
    return SpinOperator(n, np.diag(z_values(n).sum(axis=0).astype(float)))


def one_excitation_energies(H: SpinOperator) -> np.ndarray:
    """Eigenvalues of ``H`` restricted to states with exactly one spin up."""
    ups = (z_values(H.n_spins) == 1).sum(axis=0)
    idx = np.flatnonzero(ups == 1)
    return np.linalg.eigvalsh(H.matrix[np.ix_(idx, idx)])

def similarity_transform(n: int, cap: int | None = None) -> SpinOperator:
    """``prod_{j even} exp(-i pi/2 sigma_x^j)``: a pi rotation about x on spins 2, 4, ...

    Maps the nearest-neighbor DQ Hamiltonian onto the XY one.
    """
    check_cap(n, cap)
    dim = 2**n
    idx = np.arange(dim)
    mask = 0
    for j in range(2, n + 1, 2):
        mask |= 1 << (n - j)
    n_rotated = n // 2
    U = np.zeros((dim, dim), dtype=complex)
    U[idx ^ mask, idx] = (-1j) ** n_rotated
    return SpinOperator(n, U)


def conjugate(U: SpinOperator, A: SpinOperator) -> SpinOperator:
    """``U A U^dagger``."""
    return SpinOperator(A.n_spins, U.matrix @ A.matrix @ U.matrix.conj().T)


def evolve(H: SpinOperator, rho0: SpinOperator, t: float) -> SpinOperator:
    """``exp(-iHt) rho0 exp(iHt)`` using the cached eigendecomposition of ``H``."""
    if H.n_spins != rho0.n_spins:
        raise InvalidInputError(
            f"Hamiltonian acts on {H.n_spins} spins, state on {rho0.n_spins}"
        )
    if t == 0:
        return rho0
    return SpinOperator(rho0.n_spins, H.propagator.evolve(rho0.matrix, t))


def polarization(rho: SpinOperator, b: int) -> float:
    """``Tr(rho sigma_z^b) / 2^N``; the state ``sigma_z^b`` reads 1."""
    n = rho.n_spins
    if not 1 <= b <= n:
        raise InvalidInputError(f"spin {b} outside chain of {n} spins")
    return float(np.real(np.diag(rho.matrix) @ z_values(n)[b - 1])) / rho.dim


def transfer_series(H: SpinOperator, rho0: SpinOperator, b: int, times) -> np.ndarray:
    """Polarization of spin ``b`` along a time grid (eigenbasis fast path)."""
    return H.propagator.expectation_series(rho0.matrix, sigma_z(H.n_spins, b).matrix, times)


def rotate_z(rho: SpinOperator, phi: float) -> SpinOperator:
    """``R_z(phi) rho R_z(phi)^dagger`` with ``R_z(phi) = exp(-i phi sum_j sigma_z^j / 2)``."""
    q = coherence_orders(rho.n_spins)
    return SpinOperator(rho.n_spins, np.exp(-1j * phi * q) * rho.matrix)


def _phase_steps(n_steps: int, max_order: int) -> np.ndarray:
    if n_steps <= 2 * max_order:
        raise AliasingError(
            f"{n_steps} phase steps cannot separate coherence orders up to {max_order}; "
            f"need more than {2 * max_order}"
        )
    return 2 * np.pi * np.arange(n_steps) / n_steps


@dataclass(frozen=True)
class CoherenceDecomposition:
    components: dict[int, SpinOperator]

    def reconstruct(self) -> SpinOperator:
        parts = list(self.components.values())
        total = parts[0].matrix.copy()
        for p in parts[1:]:
            total = total + p.matrix
        return SpinOperator(parts[0].n_spins, total)

    def intensities(self) -> dict[int, float]:
        """``Tr(rho_q^dagger rho_q) / 2^N`` per order."""
        return {q: float(np.real(c.inner(c))) for q, c in self.components.items()}


def coherence_decompose(
    rho: SpinOperator, max_order: int | None = None, n_steps: int | None = None
) -> CoherenceDecomposition:
    """Split ``rho`` into coherence orders by a simulated phase cycle.

    ``rho_q = (1/M) sum_k exp(i q phi_k) R_z(phi_k) rho R_z(phi_k)^dagger`` with
    ``phi_k = 2 pi k / M``. ``M`` must exceed ``2 * max_order``; the default
    ``max_order`` is the chain length (every order).
    """
    max_order = rho.n_spins if max_order is None else max_order
    n_steps = 2 * max_order + 2 if n_steps is None else n_steps
    phis = _phase_steps(n_steps, max_order)
    rotated = [rotate_z(rho, phi).matrix for phi in phis]
    components = {}
    for q in range(-max_order, max_order + 1):
        acc = sum(np.exp(1j * q * phi) * r for phi, r in zip(phis, rotated))
        components[q] = SpinOperator(rho.n_spins, acc / n_steps)
    return CoherenceDecomposition(components)


def _required_order(rho0: SpinOperator, H: SpinOperator, readout: SpinOperator) -> int:
    if H.max_order is None or not (rho0.is_diagonal() and readout.is_diagonal()):
        return rho0.n_spins
    return H.max_order


def mqc_protocol(
    rho0: SpinOperator,
    H: SpinOperator,
    t,
    n_steps: int | None = None,
    readout: SpinOperator | None = None,
    max_order: int | None = None,
) -> dict[int, float]:
    """Simulate a multiple-quantum experiment and return intensity per order.

    Each repetition evolves ``rho0`` forward under ``H`` for ``t``, applies the
    z rotation ``phi_k = 2 pi k / M``, evolves back for ``t`` and reads out
    ``readout`` (``rho0`` itself by default, i.e. a local echo; pass
    :func:`total_z` for collective detection). The signal is Fourier analysed
    over ``phi_k`` and normalized by the t = 0 signal, so a single-spin state
    gives ``sum_q J_q = 1``.

    ``M`` defaults to ``max(8, 2 q_max + 2)`` where ``q_max`` is the largest
    order ``H`` can reach (the chain length for long-range DQ tables).

    ``t`` may be a scalar or an array; arrays return arrays per order.
    """
    readout = rho0 if readout is None else readout
    if not (H.n_spins == rho0.n_spins == readout.n_spins):
        raise InvalidInputError("Hamiltonian, state and readout act on different chains")
    needed = _required_order(rho0, H, readout) if max_order is None else max_order
    if n_steps is None:
        n_steps = max(DEFAULT_PHASE_STEPS, 2 * needed + 2)
    phis = _phase_steps(n_steps, needed)
    norm = float(np.real(np.vdot(readout.matrix, rho0.matrix))) / rho0.dim
    if norm == 0:
        raise InvalidInputError("readout has no overlap with the initial state")

    prop = H.propagator
    q = coherence_orders(rho0.n_spins)
    if prop.block_diagonal(rho0.matrix) and prop.block_diagonal(readout.matrix):
        # Every stage stays inside the blocks of H; skip the zero off-block parts.
        def sectors(ti):
            return prop.block_unitaries(ti)
    else:
        def sectors(ti):
            return [(np.arange(rho0.dim), prop.unitary(ti))]

    orders = range(-needed, needed + 1)
    times = np.atleast_1d(np.asarray(t, dtype=float))
    result = {order: np.zeros(times.shape) for order in orders}
    for i, ti in enumerate(times):
        signal = np.zeros(n_steps, dtype=complex)
        for idx, U in sectors(ti):
            sub = np.ix_(idx, idx)
            forward = U @ rho0.matrix[sub] @ U.conj().T
            target = readout.matrix[sub]
            for k, phi in enumerate(phis):
                encoded = np.exp(-1j * phi * q[sub]) * forward
                echoed = U.conj().T @ encoded @ U
                signal[k] += np.vdot(target, echoed)
        signal /= rho0.dim
        for order in orders:
            result[order][i] = np.real(np.mean(np.exp(1j * order * phis) * signal)) / norm
    if np.ndim(t) == 0:
        return {order: float(v[0]) for order, v in result.items()}
    return result


def dipolar_transport_baseline(n: int, table: CouplingTable, t_grid, cap: int | None = None) -> TimeSeries:
    """End-to-end polarization ``P_1N(t)`` under the secular dipolar Hamiltonian.

    The series also carries the total magnetization, which this Hamiltonian
    conserves; ``metadata['max_transfer']`` is the largest ``P_1N`` on the grid.
    """
    if table.n_spins != n:
        raise InvalidInputError(f"table has {table.n_spins} spins, expected {n}")
    H = build_hamiltonian(HamiltonianKind.DIPOLAR, table, cap)
    rho0 = sigma_z(n, 1)
    t_grid = np.asarray(t_grid, dtype=float)
    p1n = transfer_series(H, rho0, n, t_grid)
    total = H.propagator.expectation_series(rho0.matrix, total_z(n).matrix, t_grid)
    return TimeSeries(
        t_grid,
        {"P_dip_1N": p1n, "total_z": total},
        {
            "experiment": "dipolar_baseline",
            "n": n,
            "engine": "oracle",
            "model": "dipolar",
            "max_transfer": float(p1n.max()),
        },
    )
