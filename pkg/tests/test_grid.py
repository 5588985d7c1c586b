import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import ndimage

from mwrp.grid import (Cell, MapFormatError, ProblemInstance, border_cells, from_rows,
                       generate_map, parse_map, sample_border_starts, serialize_map)

HEADER = "type octile\nheight {h}\nwidth {w}\nmap\n"


def test_minimal_map():
    g = parse_map(HEADER.format(h=1, w=3) + "...")
    assert (g.height, g.width, g.num_free) == (1, 3, 3)
    assert g.free_cells == [Cell(0, 0), Cell(0, 1), Cell(0, 2)]


def test_disconnected_keeps_first_of_equal_components():
    g = parse_map(HEADER.format(h=1, w=3) + ".@.")
    assert g.free_cells == [Cell(0, 0)]
    assert g.demoted == 1


def test_larger_component_wins():
    g = from_rows([".@..", ".@.."])
    assert g.num_free == 4 and g.demoted == 2
    assert Cell(0, 0) not in g.free_cells


def test_obstacle_characters():
    g = from_rows([".T@", "G.."])
    assert [tuple(c) for c in g.free_cells] == [(0, 0), (1, 0), (1, 1), (1, 2)]


@pytest.mark.parametrize("text", [
    "type octile\nheight 1\nmap\n...",
    "type octile\nheight 1\nwidth 3\nmap\n..",
    "type octile\nheight 2\nwidth 3\nmap\n...",
    "type octile\nheight 1\nwidth 3\nmap\n.x.",
    "type octile\nheight 1\nwidth 3\nmap\n@@@",
    "type octile\nheight one\nwidth 3\nmap\n...",
    "type octile\nheight 1\nwidth 3\nmatrix\n...",
])
def test_malformed_maps_rejected(text):
    with pytest.raises(MapFormatError):
        parse_map(text)


def test_free_cells_row_major():
    g = generate_map("random", 9, 7, 0.3, 4)
    cells = g.free_cells
    assert cells == sorted(cells)
    assert set(cells) == {Cell(r, c) for r, c in zip(*np.nonzero(g.occupancy))}
    assert all(g.cell_ids[c] == i for i, c in enumerate(cells))


def test_zero_density_is_open():
    g = generate_map("random", 10, 10, 0.0, 123)
    assert g.num_free == 100


def test_random_obstacle_count_before_repair():
    g = generate_map("random", 32, 32, 0.2, 5)
    assert g.num_free + g.demoted == 32 * 32 - int(0.2 * 32 * 32)


@pytest.mark.parametrize("style", ["random", "room", "maze"])
def test_generation_deterministic_and_connected(style):
    a = generate_map(style, 32, 32, 0.2, 11)
    b = generate_map(style, 32, 32, 0.2, 11)
    assert a == b
    _, n = ndimage.label(a.occupancy)
    assert n == 1


def test_room_layout():
    g = generate_map("room", 11, 11, 0.0, 2)
    occ = g.occupancy
    for i in range(3):
        for j in range(3):
            assert occ[4 * i:4 * i + 3, 4 * j:4 * j + 3].all()
    # each shared wall has exactly one door
    assert occ[0:3, 3].sum() == 1 and occ[3, 0:3].sum() == 1
    assert not occ[3, 3]


def test_maze_is_tree_with_balanced_walls():
    for seed in range(20):
        g = generate_map("maze", 33, 33, 0.0, seed)
        occ = g.occupancy
        edges = int((occ[1:, :] & occ[:-1, :]).sum() + (occ[:, 1:] & occ[:, :-1]).sum())
        assert edges == g.num_free - 1
        assert 0.4 <= 1 - g.num_free / occ.size <= 0.6


def test_maze_has_border_starts():
    g = generate_map("maze", 32, 32, 0.0, 0)
    assert len(border_cells(g)) > 0


def test_generator_rejects_bad_input():
    with pytest.raises(ValueError):
        generate_map("random", 2, 5)
    with pytest.raises(ValueError):
        generate_map("cave", 8, 8)
    with pytest.raises(ValueError):
        generate_map("random", 8, 8, 1.0)


def test_border_starts_open_3x3():
    g = generate_map("random", 3, 3, 0.0, 0)
    for seed in range(10):
        (s,) = sample_border_starts(g, 1, seed)
        assert s != Cell(1, 1)


def test_border_cells_rows_and_cols():
    g = from_rows(["@@@@", "@..@", "@...", "@@@@"])
    assert border_cells(g) == [Cell(2, 3)]


def test_border_starts_forced_choice():
    # every neighbour of a corner is itself a border cell, so (0, 0) must stand alone
    g = from_rows([".@@", "@@@", "@@@"])
    assert sample_border_starts(g, 3, 9) == [Cell(0, 0)] * 3


def test_border_starts_deterministic():
    g = generate_map("random", 10, 10, 0.0, 0)
    assert sample_border_starts(g, 2, 42) == sample_border_starts(g, 2, 42)


def test_problem_instance_validation():
    g = from_rows(["..@", "..."])
    p = ProblemInstance(g, [(0, 0)])
    assert p.unseen == frozenset(g.free_cells) and p.num_agents == 1
    with pytest.raises(ValueError):
        ProblemInstance(g, [(0, 2)])
    with pytest.raises(ValueError):
        ProblemInstance(g, [])
    with pytest.raises(ValueError):
        ProblemInstance(g, [(0, 0)], unseen=[(0, 2)])


@settings(max_examples=60, deadline=None)
@given(st.integers(3, 12), st.integers(3, 12), st.floats(0, 0.6), st.integers(0, 2**32))
def test_serialize_roundtrip(w, h, density, seed):
    g = generate_map("random", w, h, density, seed)
    again = parse_map(serialize_map(g))
    assert again == g and again.demoted == 0
