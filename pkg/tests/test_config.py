import pytest
from hypothesis import given, strategies as st

from fifosim.config import (
    GridError, config_id, grids_for_line_sizes, parse_size_list, table_grid, validate_grid,
)


def test_table_grid_has_60_configs():
    grid = validate_grid(4, parse_size_list("1..16384"), [2, 4, 8, 16])
    assert grid.num_configs == 60
    assert grid.set_sizes == tuple(2 ** i for i in range(15))
    assert grid == table_grid(4)


@pytest.mark.parametrize("line, sets, assocs", [
    (4, [1], [1, 2]),    # associativity 1 forbidden
    (4, [3], [2]),       # not a power of two
    (4, [], [2]),
    (4, [1], []),
    (0, [1], [2]),
    (6, [1], [2]),
    (4, [1], [2, 12]),
])
def test_invalid_grids(line, sets, assocs):
    with pytest.raises(GridError):
        validate_grid(line, sets, assocs)


def test_normalizes_order_and_duplicates():
    grid = validate_grid(8, [4, 1, 4, 2], [8, 2, 2])
    assert grid.set_sizes == (1, 2, 4)
    assert grid.associativities == (2, 8)


def test_config_id_examples():
    grid = validate_grid(4, [1, 2], [2, 4])
    assert config_id(grid, 0, 0) == 0
    assert config_id(grid, 1, 0) == 2
    assert config_id(grid, 1, 1) == 3 == grid.num_configs - 1
    with pytest.raises(IndexError):
        config_id(grid, 2, 0)
    with pytest.raises(IndexError):
        config_id(grid, 0, -1)


@given(st.integers(1, 15), st.integers(1, 4))
def test_config_id_is_bijective_and_ordered(n_sets, n_assoc):
    grid = validate_grid(4, [2 ** i for i in range(n_sets)], [2 ** i for i in range(1, n_assoc + 1)])
    ids = [config_id(grid, li, ai) for li in range(n_sets) for ai in range(n_assoc)]
    # Lexicographic (level, assoc) order is exactly ascending id order.
    assert ids == list(range(grid.num_configs))
    for cid, s, a in grid.configs():
        assert grid.config(cid) == (s, a)


def test_parse_size_list():
    assert parse_size_list("1..16") == [1, 2, 4, 8, 16]
    assert parse_size_list("3..17") == [4, 8, 16]
    assert parse_size_list("2,4, 8") == [2, 4, 8]
    assert parse_size_list("1,64..128") == [1, 64, 128]
    assert parse_size_list("0x10") == [16]
    for bad in ("", "a", "5..4", "1,,2", "3..3"):
        with pytest.raises(GridError):
            parse_size_list(bad)


def test_grids_for_line_sizes():
    grids = grids_for_line_sizes([16, 4, 4], [1, 2], [2])
    assert [g.line_size for g in grids] == [4, 16]
