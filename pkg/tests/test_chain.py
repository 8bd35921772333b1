import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chainsim.chain import (
    ChainPreset,
    CouplingTable,
    DeviationState,
    HamiltonianKind,
    build_table,
    dipolar_couplings,
    mode_grid,
    nearest_neighbor_couplings,
)
from chainsim.errors import InvalidChainError, InvalidStateError, UnsupportedModelError


def test_nearest_neighbor_two_spins():
    assert np.array_equal(nearest_neighbor_couplings(2, 1.0).d, [[0, 1], [1, 0]])


def test_nearest_neighbor_three_spins():
    t = nearest_neighbor_couplings(3, 2.5)
    assert t.coupling(1, 2) == t.coupling(2, 3) == 2.5
    assert t.coupling(1, 3) == 0


def test_nearest_neighbor_21_bond_count():
    t = nearest_neighbor_couplings(21, 1.0)
    assert np.count_nonzero(np.triu(t.d, 1)) == 20
    assert np.count_nonzero(np.diag(t.d, 1)) == 20
    assert t.is_nearest_neighbor()


@pytest.mark.parametrize("n", [0, 1, -3])
def test_short_chain_rejected(n):
    with pytest.raises(InvalidChainError):
        nearest_neighbor_couplings(n, 1.0)


def test_zero_coupling_rejected():
    with pytest.raises(InvalidChainError):
        nearest_neighbor_couplings(4, 0.0)


def test_dipolar_values():
    assert dipolar_couplings(3, 1.0, 3).coupling(1, 3) == pytest.approx(1 / 8)
    assert dipolar_couplings(4, 8.0, 3).coupling(1, 4) == pytest.approx(8 / 27)
    assert dipolar_couplings(2, 1.0, 3) == nearest_neighbor_couplings(2, 1.0)


def test_dipolar_bad_exponent():
    with pytest.raises(InvalidChainError):
        dipolar_couplings(4, 1.0, 0.0)


@given(st.integers(2, 30), st.floats(-5, 5).filter(lambda x: abs(x) > 1e-6), st.floats(0.5, 12))
def test_generated_tables_bitwise_symmetric(n, d, exponent):
    for table in (nearest_neighbor_couplings(n, d), dipolar_couplings(n, d, exponent)):
        assert np.array_equal(table.d, table.d.T)
        assert not np.any(np.diag(table.d))


@given(st.integers(3, 15))
def test_long_range_tail_shrinks_with_exponent(n):
    weak, strong = dipolar_couplings(n, 1.0, 30), dipolar_couplings(n, 1.0, 3)
    i, j = np.indices((n, n))
    far = np.abs(i - j) >= 2
    assert np.all(np.abs(weak.d[far]) <= np.abs(strong.d[far]))
    assert np.all(np.abs(weak.d[far]) < 1e-8)


def test_table_is_read_only():
    t = nearest_neighbor_couplings(3, 1.0)
    with pytest.raises(ValueError):
        t.d[0, 1] = 5


@pytest.mark.parametrize(
    "matrix",
    [np.zeros((1, 1)), np.zeros((2, 3)), [[0, 1], [2, 0]], [[1, 0], [0, 0]], [[0, np.nan], [np.nan, 0]]],
)
def test_invalid_tables(matrix):
    with pytest.raises(InvalidChainError):
        CouplingTable(np.asarray(matrix, dtype=float))


def test_uniform_coupling_of_long_range_table():
    assert nearest_neighbor_couplings(5, 0.7).uniform_nn_coupling() == 0.7
    with pytest.raises(UnsupportedModelError):
        dipolar_couplings(5, 1.0, 3).uniform_nn_coupling()


def test_pairs_enumerate_each_bond_once():
    pairs = list(dipolar_couplings(4, 1.0, 3).pairs())
    assert [(i, j) for i, j, _ in pairs] == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


def test_mode_grid_examples():
    assert np.allclose(mode_grid(3).k_values, [np.pi / 4, np.pi / 2, 3 * np.pi / 4])
    assert np.allclose(mode_grid(2).k_values, [np.pi / 3, 2 * np.pi / 3])
    g = mode_grid(21)
    assert len(g.k_values) == 21 and g.k_values[10] == pytest.approx(np.pi / 2)


@given(st.integers(2, 200))
def test_mode_grid_properties(n):
    k = mode_grid(n).k_values
    assert len(k) == n
    assert np.all(np.diff(k) > 0) and k[0] > 0 and k[-1] < np.pi
    assert np.allclose(k + k[::-1], np.pi, atol=1e-14)


@given(st.integers(2, 40))
def test_mode_functions_orthonormal(n):
    phi = mode_grid(n).mode_functions()
    assert np.allclose(phi.T @ phi, np.eye(n), atol=1e-12)


def test_kind_parse():
    assert HamiltonianKind.parse("DQ") is HamiltonianKind.DQ
    assert HamiltonianKind.parse(HamiltonianKind.XY) is HamiltonianKind.XY
    with pytest.raises(ValueError):
        HamiltonianKind.parse("heisenberg")


def test_deviation_state_parsing():
    assert DeviationState.parse("1,21").weights == {1: 1.0, 21: 1.0}
    assert DeviationState.parse("1:0.5, 3:-1").weights == {1: 0.5, 3: -1.0}
    assert DeviationState.chain_ends(7) == DeviationState({1: 1, 7: 1})
    assert DeviationState.single(2).is_single_spin


@pytest.mark.parametrize("text", ["", "a", "1:x", "0", "1:0", "2.5"])
def test_bad_deviation_states(text):
    with pytest.raises(InvalidStateError):
        DeviationState.parse(text)


def test_state_index_bounds():
    with pytest.raises(InvalidStateError):
        DeviationState({5: 1.0}).check(4)
    with pytest.raises(InvalidStateError):
        DeviationState({1.5: 1.0})
    assert np.array_equal(DeviationState({2: 3.0}).vector(3), [0, 3, 0])


def test_preset_round_trip(tmp_path):
    path = tmp_path / "chain.json"
    path.write_text(json.dumps({"n_spins": 5, "model": "dipolar", "d": 2.0, "exponent": 3, "state": {"1": 1, "5": 1}}))
    preset = ChainPreset.load(path)
    assert preset.table() == dipolar_couplings(5, 2.0, 3)
    assert preset.initial_state() == DeviationState.chain_ends(5)
    assert ChainPreset.from_mapping({"n_spins": 4, "state": "2"}).initial_state() == DeviationState.single(2)


def test_preset_rejects_unknown_model():
    with pytest.raises(InvalidChainError):
        build_table("ring", 4)
