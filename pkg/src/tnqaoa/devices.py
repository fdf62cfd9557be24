"""Frozen connectivity tables for the named heavy-hex devices.

Each table fixes the vertex numbering, the edge set and an integer planar
embedding once and for all, so that column partitions (and therefore the
boundary-MPS sweep) are deterministic across runs and platforms.

Embedding convention: qubit rows run horizontally (x increases along a row),
bridge qubits sit between rows at the same x.  Every edge therefore connects
vertices whose x coordinates differ by at most one, which is the property the
column sampler relies on.
"""

from __future__ import annotations

# 16-qubit device: a single heavy hexagon (12-cycle) with four pendant qubits.
GUADALUPE_EDGES = [
    (0, 1), (1, 2), (1, 4), (2, 3), (3, 5), (4, 7), (5, 8), (6, 7),
    (7, 10), (8, 9), (8, 11), (10, 12), (11, 14), (12, 13), (12, 15), (13, 14),
]

GUADALUPE_COORDS = {
    0: (0, 1), 1: (1, 1), 2: (1, 2), 3: (1, 3), 4: (2, 1), 5: (2, 3),
    6: (3, 0), 7: (3, 1), 8: (3, 3), 9: (3, 4), 10: (4, 1), 11: (4, 3),
    12: (5, 1), 13: (5, 2), 14: (5, 3), 15: (6, 1),
}

# 27-qubit device: two heavy hexagons sharing a rung, plus pendants.
GENEVA_EDGES = [
    (0, 1), (1, 2), (1, 4), (2, 3), (3, 5), (4, 7), (5, 8), (6, 7),
    (7, 10), (8, 9), (8, 11), (10, 12), (11, 14), (12, 13), (12, 15), (13, 14),
    (14, 16), (15, 18), (16, 19), (17, 18), (18, 21), (19, 20), (19, 22),
    (21, 23), (22, 25), (23, 24), (24, 25), (25, 26),
]

GENEVA_COORDS = {
    0: (0, 1), 1: (1, 1), 2: (1, 2), 3: (1, 3), 4: (2, 1), 5: (2, 3),
    6: (3, 0), 7: (3, 1), 8: (3, 3), 9: (3, 4), 10: (4, 1), 11: (4, 3),
    12: (5, 1), 13: (5, 2), 14: (5, 3), 15: (6, 1), 16: (6, 3),
    17: (7, 0), 18: (7, 1), 19: (7, 3), 20: (7, 4), 21: (8, 1), 22: (8, 3),
    23: (9, 1), 24: (9, 2), 25: (9, 3), 26: (10, 3),
}

# Row x-extents and per-band bridge columns of the 127-qubit layout.
_WASHINGTON_ROW_XS = [
    range(0, 14),
    range(0, 15), range(0, 15), range(0, 15), range(0, 15), range(0, 15),
    range(1, 15),
]
_WASHINGTON_BRIDGES_EVEN = (0, 4, 8, 12)
_WASHINGTON_BRIDGES_ODD = (2, 6, 10, 14)


def washington_table():
    """Edge list and coordinates of the 127-qubit heavy-hex layout.

    Generated from the row pattern of the 127-qubit processors: seven qubit
    rows of width 14/15 joined by four bridge qubits per band, with bridge
    columns alternating between {0, 4, 8, 12} and {2, 6, 10, 14}.  Qubits are
    numbered row 0 left to right, then the first bridge band, then row 1, and
    so on.  Regression tests pin n = 127 and the edge count.
    """
    coords = {}
    row_lookup = []   # row_lookup[r][x] -> qubit id
    bridges = []      # (qubit id, x, band index)
    q = 0
    for r, xs in enumerate(_WASHINGTON_ROW_XS):
        row_lookup.append({})
        for x in xs:
            coords[q] = (x, 2 * r)
            row_lookup[r][x] = q
            q += 1
        if r < 6:
            bridge_xs = _WASHINGTON_BRIDGES_EVEN if r % 2 == 0 else _WASHINGTON_BRIDGES_ODD
            for x in bridge_xs:
                coords[q] = (x, 2 * r + 1)
                bridges.append((q, x, r))
                q += 1

    edges = []
    for lookup in row_lookup:
        xs = sorted(lookup)
        for xa, xb in zip(xs, xs[1:]):
            if xb == xa + 1:
                edges.append((lookup[xa], lookup[xb]))
    for bq, x, r in bridges:
        edges.append((row_lookup[r][x], bq))
        edges.append((bq, row_lookup[r + 1][x]))
    return sorted(tuple(sorted(e)) for e in edges), coords


DEVICES = {
    "guadalupe": (GUADALUPE_EDGES, GUADALUPE_COORDS),
    "geneva": (GENEVA_EDGES, GENEVA_COORDS),
}
