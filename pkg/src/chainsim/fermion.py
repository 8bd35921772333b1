"""Closed-form free-fermion engine for uniform nearest-neighbor XY and DQ chains.

After the Jordan-Wigner map ``c_j = -prod_{l<j} sigma_z^l sigma_j^-`` and the
sine transform ``a_k = sqrt(2/(N+1)) sum_j sin(k j) c_j`` the XY chain is
diagonal with single-particle frequencies ``2 d cos k``. Every observable here
is a function of the mode phases ``psi_k(t) = 2 d t cos k``.

The DQ chain is handled without building Bogoliubov operators. Its only effect
on the mode operators is to mix ``k`` with its partner ``pi - k`` (the open-chain
stand-in for ``-k``)::

    e^{-iHt} a_k e^{iHt} = cos(psi_k) a_k - i sin(psi_k) a_{pi-k}^dagger

which is exact once the Jordan-Wigner fermions carry the staggered gauge
``(+, +, -, -, +, +, ...)``; every observable below (site magnetizations and
coherence weights) is insensitive to that gauge. ``tests/test_fermion.py``
locks this rule against the dense oracle.

All functions accept scalar or array ``t`` and broadcast over it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain import CouplingTable, DeviationState, HamiltonianKind, ModeGrid, mode_grid
from .errors import InvalidStateError, UnsupportedModelError


@dataclass(frozen=True)
class Spectrum:
    """Single-particle eigenfrequencies ``2 d cos k`` over the mode grid."""

    kind: HamiltonianKind
    eigenfrequencies: np.ndarray

    def many_body(self) -> np.ndarray:
        """Sorted energies of all 2^N fermion occupation patterns."""
        energies = np.zeros(1)
        for eps in self.eigenfrequencies:
            energies = np.concatenate([energies, energies + eps])
        return np.sort(energies)


def spectrum(kind, n: int, d: float = 1.0) -> Spectrum:
    """Single-particle spectrum of the uniform nearest-neighbor XY or DQ chain.

    The DQ chain is unitarily equivalent to the XY chain, so both return the
    same frequencies.
    """
    kind = HamiltonianKind.parse(kind)
    if kind is HamiltonianKind.DIPOLAR:
        raise UnsupportedModelError("the secular dipolar chain has no free-fermion spectrum")
    grid = mode_grid(n)
    return Spectrum(kind, 2.0 * d * np.cos(grid.k_values))


def spectrum_for_table(kind, table: CouplingTable) -> Spectrum:
    return spectrum(kind, table.n_spins, table.uniform_nn_coupling())


def mode_phases(grid: ModeGrid, d: float, t) -> np.ndarray:
    """``psi_k(t) = 2 d t cos k``, shape ``t.shape + (N,)``."""
    t = np.asarray(t, dtype=float)
    return 2.0 * d * t[..., None] * np.cos(grid.k_values)


def _check_sites(n: int, *sites: int):
    for s in sites:
        if not 1 <= s <= n:
            raise InvalidStateError(f"spin {s} outside chain of {n} spins")


def _amplitude(a: int, b: int, n: int, d: float, t) -> np.ndarray:
    # sum_k sin(k a) sin(k b) exp(-i psi_k(t))
    _check_sites(n, a, b)
    grid = mode_grid(n)
    k = grid.k_values
    weights = np.sin(k * a) * np.sin(k * b)
    return np.exp(-1j * mode_phases(grid, d, t)) @ weights


def polarization_xy(a: int, b: int, n: int, d: float, t):
    """Polarization found on spin ``b`` at time ``t`` after starting on spin ``a`` (XY)."""
    amp = _amplitude(a, b, n, d, t)
    return 4.0 / (n + 1) ** 2 * np.abs(amp) ** 2


def polarization_dq(a: int, b: int, n: int, d: float, t):
    """Same as :func:`polarization_xy` but under the DQ Hamiltonian.

    Equals the XY value for even ``b - a`` and its negative for odd ``b - a``.
    """
    amp = _amplitude(a, b, n, d, t)
    return 4.0 / (n + 1) ** 2 * np.real(amp**2)


def _sin2(a: int, n: int):
    _check_sites(n, a)
    grid = mode_grid(n)
    return grid, np.sin(grid.k_values * a) ** 2


def mqc_intensities(a: int, n: int, d: float, t):
    """Zero- and double-quantum intensities ``(J0, J2)`` for ``sigma_z^a`` under DQ.

    ``J2`` is the weight of the +2 order alone (the -2 order carries the same
    weight), hence ``J0 + 2 J2 = 1``.

    The double sum over ``(k, h)`` of ``cos^2(psi_k + psi_h)`` factorizes:
    ``cos^2 x = (1 + cos 2x) / 2`` and ``sum s_k s_h cos(2 psi_k + 2 psi_h)``
    is ``Re[(sum s_k exp(2 i psi_k))^2]``, so each time point costs O(N).
    """
    grid, s = _sin2(a, n)
    psi = mode_phases(grid, d, t)
    total = s.sum()  # (N+1)/2
    z = np.exp(2j * psi) @ s
    cross = np.real(z * z)
    j0 = 2.0 / (n + 1) ** 2 * (total**2 + cross)
    j2 = 1.0 / (n + 1) ** 2 * (total**2 - cross)
    return j0, j2


def mqc_intensities_collective(a: int, n: int, d: float, t):
    """MQC intensities when only the total magnetization is read out."""
    grid, s = _sin2(a, n)
    psi = mode_phases(grid, d, t)
    j0 = 2.0 / (n + 1) * (np.cos(2 * psi) ** 2 @ s)
    j2 = 1.0 / (n + 1) * (np.sin(2 * psi) ** 2 @ s)
    return j0, j2


@dataclass(frozen=True)
class QuadraticObservable:
    """Operator ``scalar + sum P_kh a_k^+ a_h + sum Q_kh a_k^+ a_h^+ + h.c.(Q)``.

    ``P`` is Hermitian and ``Q`` antisymmetric; the annihilation-pair block is
    implied by Hermiticity (``-conj(Q)``). The normalized trace over spin
    space is ``scalar + tr(P) / 2``.

    With occupied mode meaning spin up, a deviation state ``sum_a w_a sigma_z^a``
    is represented as the operator ``-1/2 sum_a w_a sigma_z^a``, which keeps the
    familiar ``1/2 - (2/(N+1)) sum ...`` form.
    """

    grid: ModeGrid
    scalar: float
    P: np.ndarray
    Q: np.ndarray

    @property
    def n_modes(self) -> int:
        return self.grid.n_spins

    def normalized_trace(self) -> float:
        return float(self.scalar + np.real(np.trace(self.P)) / 2.0)

    def zero_quantum_weight(self) -> float:
        """Squared Hilbert-Schmidt norm of the particle-conserving part, times 4."""
        return float(np.sum(np.abs(self.P) ** 2))

    def double_quantum_weight(self) -> float:
        """Weight of the +2 pairing block, on the same scale as :meth:`zero_quantum_weight`."""
        return float(2.0 * np.sum(np.abs(self.Q) ** 2))

    def overlaps(self, other: "QuadraticObservable") -> tuple[float, float]:
        """Per-order inner products ``(<self, other>_0, <self, other>_+2)``, same scale."""
        zero = np.real(np.vdot(self.P, other.P))
        double = 2.0 * np.real(np.vdot(self.Q, other.Q))
        return float(zero), float(double)

    def polarization(self, b: int) -> float:
        """``sigma_z^b`` readout, scaled so the state ``sigma_z^b`` itself reads 1."""
        _check_sites(self.n_modes, b)
        phi = self.grid.mode_functions([b])[0]
        return float(-np.real(phi @ self.P @ phi))


def initial_observable(state: DeviationState, grid: ModeGrid) -> QuadraticObservable:
    """Mode-space coefficients of a deviation state at t = 0 (no pairing terms)."""
    n = grid.n_spins
    w = state.vector(n)
    phi = grid.mode_functions()  # [site, mode]
    P = -(phi.T * w) @ phi
    P = (P + P.T) / 2.0
    return QuadraticObservable(
        grid, float(w.sum() / 2.0), P.astype(complex), np.zeros((n, n), dtype=complex)
    )


def evolve_xy(obs: QuadraticObservable, t: float, d: float = 1.0) -> QuadraticObservable:
    """Schrodinger-picture evolution under the nearest-neighbor XY chain."""
    phase = np.exp(-1j * mode_phases(obs.grid, d, t))
    P = phase[:, None] * obs.P * phase.conj()[None, :]
    Q = phase[:, None] * obs.Q * phase[None, :]
    return QuadraticObservable(obs.grid, obs.scalar, P, Q)


def evolve_dq(obs: QuadraticObservable, t: float, d: float = 1.0) -> QuadraticObservable:
    """Schrodinger-picture evolution under the nearest-neighbor DQ chain.

    Substitutes ``a_k^+ -> cos(psi_k) a_k^+ + i sin(psi_k) a_{k'}`` and
    ``a_h -> cos(psi_h) a_h - i sin(psi_h) a_{h'}^+`` (``k' = pi - k``) and
    normal-orders the result. Cost is O(N^2).
    """
    psi = mode_phases(obs.grid, d, t)
    c, s = np.cos(psi), np.sin(psi)
    P, Q = obs.P, obs.Q
    Qa = -Q.conj()  # coefficient block of a_k a_h

    def lr(x, A, y):  # diag(x) @ A @ diag(y)
        return x[:, None] * A * y[None, :]

    def rev_cols(A):
        return A[:, ::-1]

    def rev_rows(A):
        return A[::-1, :]

    # Blocks of T^dagger M T with T = [[C, -iSR], [iSR, C]], M = [[P, Q], [Qa, 0]].
    m11 = lr(c, P, c) + 1j * rev_cols(lr(c, Q, s)) - 1j * rev_rows(lr(s, Qa, c))
    m12 = (
        -1j * rev_cols(lr(c, P, s))
        + lr(c, Q, c)
        - rev_rows(rev_cols(lr(s, Qa, s)))
    )
    m21 = (
        1j * rev_rows(lr(s, P, c))
        - rev_rows(rev_cols(lr(s, Q, s)))
        + lr(c, Qa, c)
    )
    m22 = (
        rev_rows(rev_cols(lr(s, P, s)))
        + 1j * rev_rows(lr(s, Q, c))
        - 1j * rev_cols(lr(c, Qa, s))
    )
    del m21  # equals -conj(new Q) for Hermitian input; not stored
    new_p = m11 - m22.T
    new_q = (m12 - m12.T) / 2.0
    scalar = obs.scalar + float(np.real(np.trace(m22)))
    return QuadraticObservable(obs.grid, scalar, new_p, new_q)


def _evolver(kind):
    kind = HamiltonianKind.parse(kind)
    if kind is HamiltonianKind.XY:
        return evolve_xy
    if kind is HamiltonianKind.DQ:
        return evolve_dq
    raise UnsupportedModelError("the secular dipolar chain is not quadratic in fermions")


def evolve_series(state: DeviationState, n: int, d: float, t, kind="dq"):
    """Evolved observables for each time in ``t``."""
    evolve = _evolver(kind)
    obs = initial_observable(state.check(n), mode_grid(n))
    return [evolve(obs, float(ti), d) for ti in np.atleast_1d(t)]


def _maybe_scalar(t, values):
    values = np.asarray(values, dtype=float)
    return values[0] if np.ndim(t) == 0 else values


def polarization_state(state: DeviationState, b: int, n: int, d: float, t, kind="dq"):
    """Magnetization of spin ``b`` for an arbitrary weighted initial state."""
    series = evolve_series(state, n, d, t, kind)
    return _maybe_scalar(t, [obs.polarization(b) for obs in series])


def mqc_intensities_state(state: DeviationState, n: int, d: float, t):
    """``(J0, J2)`` for a weighted initial state, normalized so ``J0(0) = 1``."""
    series = evolve_series(state, n, d, t, "dq")
    norm = initial_observable(state, mode_grid(n)).zero_quantum_weight()
    j0 = [obs.zero_quantum_weight() / norm for obs in series]
    j2 = [obs.double_quantum_weight() / norm for obs in series]
    return _maybe_scalar(t, j0), _maybe_scalar(t, j2)


def mqc_intensities_collective_state(state: DeviationState, n: int, d: float, t):
    """Collective ``(J0, J2)`` for a weighted initial state.

    Each order is the overlap of the evolved state with the evolved total
    magnetization, normalized by its t = 0 value.
    """
    grid = mode_grid(n)
    total = DeviationState({j: 1.0 for j in range(1, n + 1)})
    start = initial_observable(state.check(n), grid)
    norm = start.overlaps(initial_observable(total, grid))[0]
    if norm == 0:
        raise InvalidStateError("state has no total magnetization; collective readout is blind to it")
    j0, j2 = [], []
    for ti in np.atleast_1d(t):
        rho = evolve_dq(start, float(ti), d)
        readout = evolve_dq(initial_observable(total, grid), float(ti), d)
        zero, double = rho.overlaps(readout)
        j0.append(zero / norm)
        j2.append(double / norm)
    return _maybe_scalar(t, j0), _maybe_scalar(t, j2)
