"""Shared 3x3 neighborhood machinery: codes, adjacency, and lookup tables.

A pixel's 8 neighbors are indexed clockwise from north:

    index   0   1   2   3   4   5   6   7
    offset  N   NE  E   SE  S   SW  W   NW

Each neighborhood configuration is an 8-bit code (bit i set when neighbor i
is foreground), so per-pixel predicates become 256-entry lookup tables.
"""

from __future__ import annotations

import numpy as np

OFFSETS: list[tuple[int, int]] = [
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
]

# indices of the 4-adjacent (axial) neighbors within OFFSETS
AXIAL = (0, 2, 4, 6)

# position_adjacent[i][j]: neighbors i and j are themselves 8-adjacent pixels
POSITION_ADJACENT = np.zeros((8, 8), dtype=bool)
for _i, (_xi, _yi) in enumerate(OFFSETS):
    for _j, (_xj, _yj) in enumerate(OFFSETS):
        if _i != _j and abs(_xi - _xj) <= 1 and abs(_yi - _yj) <= 1:
            POSITION_ADJACENT[_i, _j] = True

# position_touching[i][j]: neighbors i and j share a pixel edge (4-adjacent),
# i.e. they are consecutive around the neighborhood ring. This is the
# "neighbours to each other" notion of the node filter bank: the axial
# neighbors of a plus-crossing center do not touch, so the center counts as
# a junction, while pixels of a thick run do touch and are ignored.
POSITION_TOUCHING = np.zeros((8, 8), dtype=bool)
for _i, (_xi, _yi) in enumerate(OFFSETS):
    for _j, (_xj, _yj) in enumerate(OFFSETS):
        if _i != _j and abs(_xi - _xj) + abs(_yi - _yj) == 1:
            POSITION_TOUCHING[_i, _j] = True


def neighbor_codes(padded: np.ndarray) -> np.ndarray:
    """Per-pixel 8-bit neighborhood codes for a 1-pixel zero-padded bool grid."""
    h, w = padded.shape[0] - 2, padded.shape[1] - 2
    code = np.zeros((h, w), dtype=np.uint8)
    for i, (dx, dy) in enumerate(OFFSETS):
        view = padded[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w]
        code |= view.astype(np.uint8) << i
    return code


def code_of(padded: np.ndarray, y: int, x: int) -> int:
    """Neighborhood code of pixel (x, y) in image coordinates (padded grid)."""
    c = 0
    for i, (dx, dy) in enumerate(OFFSETS):
        if padded[y + 1 + dy, x + 1 + dx]:
            c |= 1 << i
    return c


def set_positions(code: int) -> list[int]:
    return [i for i in range(8) if code >> i & 1]


def component_count(code: int) -> int:
    """Connected components of the set neighbor positions under pixel adjacency."""
    todo = set(set_positions(code))
    n = 0
    while todo:
        n += 1
        stack = [todo.pop()]
        while stack:
            i = stack.pop()
            linked = [j for j in todo if POSITION_ADJACENT[i, j]]
            for j in linked:
                todo.remove(j)
            stack.extend(linked)
    return n


def _popcount(code: int) -> int:
    return bin(code).count("1")


def _transitions(code: int) -> int:
    """0 -> 1 transitions walking the neighborhood circularly (N, NE, ..., NW, N)."""
    bits = [(code >> i) & 1 for i in range(8)]
    return sum(1 for i in range(8) if bits[i] == 0 and bits[(i + 1) % 8] == 1)


def _build_luts():
    popcount = np.zeros(256, dtype=np.uint8)
    simple = np.zeros(256, dtype=bool)
    zs = [np.zeros(256, dtype=bool), np.zeros(256, dtype=bool)]
    n_, e_, s_, w_ = (1 << 0), (1 << 2), (1 << 4), (1 << 6)
    for c in range(256):
        b = _popcount(c)
        popcount[c] = b
        has_open_axial = any(not (c >> i & 1) for i in AXIAL)
        simple[c] = component_count(c) == 1 and has_open_axial
        if 2 <= b <= 6 and _transitions(c) == 1:
            if not (c & n_ and c & e_ and c & s_) and not (c & e_ and c & s_ and c & w_):
                zs[0][c] = True
            if not (c & n_ and c & e_ and c & w_) and not (c & n_ and c & s_ and c & w_):
                zs[1][c] = True
    return popcount, simple, zs[0], zs[1]


POPCOUNT_LUT, SIMPLE_LUT, ZS_PASS1_LUT, ZS_PASS2_LUT = _build_luts()
