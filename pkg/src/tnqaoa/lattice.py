"""Connectivity graphs for the problem classes, with planar column partitions.

Three families are supported:

* heavy-hex devices (``guadalupe``, ``geneva``, ``washington``) frozen in
  :mod:`tnqaoa.devices`,
* heavy-hex grids built by tiling hexagonal cells (``build_heavy_hex`` with
  ``(rows, cols)``),
* open-boundary square grids (``build_square``),

plus small tree topologies (paths, stars) used for exactness benchmarks.

Every lattice carries an integer planar embedding ``coords[v] = (x, y)`` in
which each edge connects vertices in the same or adjacent x-columns.  The
column partition derived from it is what the boundary-MPS sampler sweeps over.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field

from . import devices


class LatticeError(ValueError):
    pass


@dataclass(frozen=True)
class Lattice:
    """Immutable connectivity graph with a planar embedding.

    kind is one of "heavy_hex", "square", "tree"; name records the concrete
    construction, e.g. "guadalupe", "hexgrid-2x2", "square-4x4", "path-8".
    Edges are stored as sorted (i, j) pairs with i < j; coords[v] = (x, y).
    """

    kind: str
    name: str
    n: int
    edges: tuple
    coords: tuple
    _adj: dict = field(init=False, repr=False, compare=False)

    _edge_set: set = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        adj = {v: [] for v in range(self.n)}
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        for v in adj:
            adj[v].sort()
        object.__setattr__(self, "_adj", adj)
        object.__setattr__(self, "_edge_set", set(self.edges))

    def neighbors(self, v):
        return self._adj[v]

    def degree(self, v):
        return len(self._adj[v])

    def has_edge(self, i, j):
        return (min(i, j), max(i, j)) in self._edge_set

    def to_json(self):
        return json.dumps({
            "kind": self.kind,
            "name": self.name,
            "n": self.n,
            "edges": [list(e) for e in self.edges],
            "coords": [list(self.coords[v]) for v in range(self.n)],
        })

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        return cls(
            kind=doc["kind"],
            name=doc["name"],
            n=doc["n"],
            edges=tuple(tuple(e) for e in doc["edges"]),
            coords=tuple(tuple(c) for c in doc["coords"]),
        )


@dataclass(frozen=True)
class VertexClassification:
    """Degree classes of a heavy-hex-like graph.

    v2/v3 are the degree-2 and degree-3 vertex sets, w the degree-2 vertices
    whose both neighbors have degree 3; w_pairs[l] = (n1, n2) with n1 < n2.
    """

    v2: frozenset
    v3: frozenset
    w: frozenset
    w_pairs: dict


@dataclass(frozen=True)
class ColumnPartition:
    """Column decomposition of a lattice along the x axis of its embedding.

    columns[b] lists the vertices of column b ordered by y; internal_edges[b]
    are the edges inside column b (always between consecutive positions) and
    cross_edges[b] the edges between columns b and b+1.
    """

    columns: tuple
    internal_edges: tuple
    cross_edges: tuple

    @property
    def num_columns(self):
        return len(self.columns)


def _make_lattice(kind, name, n, edges, coords):
    edges = tuple(sorted(tuple(sorted(e)) for e in edges))
    coords = tuple(tuple(coords[v]) for v in range(n))
    lat = Lattice(kind=kind, name=name, n=n, edges=edges, coords=coords)
    _validate(lat)
    return lat


def _validate(lat):
    seen = set()
    for i, j in lat.edges:
        if i == j:
            raise LatticeError(f"self-loop at vertex {i}")
        if not (0 <= i < lat.n and 0 <= j < lat.n):
            raise LatticeError(f"edge ({i},{j}) out of range")
        if (i, j) in seen:
            raise LatticeError(f"duplicate edge ({i},{j})")
        seen.add((i, j))
    # connectivity by BFS
    if lat.n:
        reached = {0}
        queue = deque([0])
        while queue:
            v = queue.popleft()
            for u in lat.neighbors(v):
                if u not in reached:
                    reached.add(u)
                    queue.append(u)
        if len(reached) != lat.n:
            raise LatticeError("graph is not connected")
    if lat.kind == "heavy_hex":
        for v in range(lat.n):
            if lat.degree(v) > 3:
                raise LatticeError(f"heavy-hex vertex {v} has degree {lat.degree(v)}")
        if not is_bipartite(lat):
            raise LatticeError("heavy-hex graph is not bipartite")
    # embedding property needed by the sampler
    for i, j in lat.edges:
        if abs(lat.coords[i][0] - lat.coords[j][0]) > 1:
            raise LatticeError(f"edge ({i},{j}) spans non-adjacent columns")


def is_bipartite(lat):
    color = {0: 0}
    queue = deque([0])
    while queue:
        v = queue.popleft()
        for u in lat.neighbors(v):
            if u not in color:
                color[u] = 1 - color[v]
                queue.append(u)
            elif color[u] == color[v]:
                return False
    return True


def build_heavy_hex(spec) -> Lattice:
    """Heavy-hex lattice for a named device or a rows x cols grid of cells.

    Named devices use the frozen tables in :mod:`tnqaoa.devices`.  The grid
    construction tiles ``rows x cols`` hexagonal cells and places one extra
    vertex on every cell edge; ``(2, 2)`` gives the 35-vertex grid system.
    """
    if isinstance(spec, str):
        name = spec.lower()
        if name == "washington":
            edges, coords = devices.washington_table()
        elif name in devices.DEVICES:
            edges, coords = devices.DEVICES[name]
        else:
            raise LatticeError(f"unknown device {spec!r}")
        n = len(coords)
        return _make_lattice("heavy_hex", name, n, edges, coords)
    rows, cols = spec
    if rows < 1 or cols < 1:
        raise LatticeError("grid construction needs rows, cols >= 1")
    return _heavy_hex_grid(rows, cols)


def _heavy_hex_grid(rows, cols):
    """Tile rows x cols hexagonal cells and subdivide every cell edge.

    The underlying hexagon skeleton is laid out brick-wall style: corner row
    y = 0..rows spans x in [max(0, y-1), y + 2*cols] except for the boundary
    rows, and the rung band between rows y and y+1 has rungs at
    x = y, y+2, ..., y + 2*cols.  Subdivision vertices sit at edge midpoints;
    all coordinates are then doubled to stay integral.  Vertices are numbered
    in raster order (y, then x) of the doubled embedding.
    """
    corner = {}
    for y in range(rows + 1):
        if y == 0:
            lo, hi = 0, 2 * cols
        elif y == rows:
            lo, hi = rows - 1, rows - 1 + 2 * cols
        else:
            lo, hi = y - 1, y + 2 * cols
        for x in range(lo, hi + 1):
            corner[(x, y)] = (2 * x, 2 * y)
    skeleton = []
    for (x, y) in corner:
        if (x + 1, y) in corner:
            skeleton.append(((x, y), (x + 1, y)))
        if y < rows and x >= y and (x - y) % 2 == 0 and (x, y + 1) in corner:
            skeleton.append(((x, y), (x, y + 1)))
    points = list(corner.values())
    edges_xy = []
    for a, b in skeleton:
        pa, pb = corner[a], corner[b]
        mid = ((pa[0] + pb[0]) // 2, (pa[1] + pb[1]) // 2)
        points.append(mid)
        edges_xy.append((pa, mid))
        edges_xy.append((mid, pb))
    order = sorted(points, key=lambda p: (p[1], p[0]))
    index = {p: v for v, p in enumerate(order)}
    n = len(order)
    edges = [(index[a], index[b]) for a, b in edges_xy]
    coords = {index[p]: p for p in order}
    return _make_lattice("heavy_hex", f"hexgrid-{rows}x{cols}", n, edges, coords)


def build_square(rows, cols) -> Lattice:
    """Open-boundary rows x cols grid graph; vertex (r, c) -> id r*cols + c."""
    if rows < 2 or cols < 2:
        raise LatticeError("square lattice needs rows, cols >= 2")
    n = rows * cols
    edges = []
    coords = {}
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            coords[v] = (c, r)
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return _make_lattice("square", f"square-{rows}x{cols}", n, edges, coords)


def path_lattice(n) -> Lattice:
    """Path graph 0-1-...-(n-1); a degenerate heavy-hex-class topology."""
    if n < 1:
        raise LatticeError("path needs n >= 1")
    edges = [(v, v + 1) for v in range(n - 1)]
    coords = {v: (v, 0) for v in range(n)}
    return _make_lattice("tree", f"path-{n}", n, edges, coords)


def star_lattice(leaves) -> Lattice:
    """Star graph: vertex 0 joined to `leaves` leaf vertices (tree benchmark)."""
    if leaves < 1:
        raise LatticeError("star needs at least one leaf")
    edges = [(0, v) for v in range(1, leaves + 1)]
    # center in its own column, leaves fanned out in the next column
    coords = {0: (0, 0)}
    for v in range(1, leaves + 1):
        coords[v] = (1, v - 1)
    return _make_lattice("tree", f"star-{leaves}", leaves + 1, edges, coords)


def classify_vertices(lat) -> VertexClassification:
    """Split vertices into degree classes and find the three-body carriers.

    w consists of degree-2 vertices with both neighbors of degree 3; pendant
    (degree-1) vertices belong to neither v2 nor v3.
    """
    if lat.kind == "square":
        raise LatticeError("vertex classification applies to heavy-hex lattices only")
    v2, v3, w = set(), set(), set()
    w_pairs = {}
    for v in range(lat.n):
        d = lat.degree(v)
        if d == 2:
            v2.add(v)
        elif d == 3:
            v3.add(v)
    for l in sorted(v2):
        n1, n2 = lat.neighbors(l)
        if n1 in v3 and n2 in v3:
            w.add(l)
            w_pairs[l] = (n1, n2)
    if lat.kind == "heavy_hex":
        deg1 = {v for v in range(lat.n) if lat.degree(v) == 1}
        if v2 | v3 | deg1 != set(range(lat.n)):
            raise LatticeError("degree classes do not partition the vertex set")
    return VertexClassification(frozenset(v2), frozenset(v3), frozenset(w), w_pairs)


def column_partition(lat) -> ColumnPartition:
    """Group vertices into x-columns ordered by y, checking chain layout.

    Raises if an internal edge connects non-consecutive positions of a column,
    if any vertex has more than one neighbor in an adjacent column on the same
    side, or if an edge spans non-adjacent columns: those would break the
    boundary-MPS sweep.
    """
    xs = sorted({lat.coords[v][0] for v in range(lat.n)})
    col_of = {}
    columns = []
    for b, x in enumerate(xs):
        col = sorted((v for v in range(lat.n) if lat.coords[v][0] == x),
                     key=lambda v: (lat.coords[v][1], v))
        columns.append(col)
        for v in col:
            col_of[v] = b
    pos = {v: k for col in columns for k, v in enumerate(col)}
    internal = [[] for _ in columns]
    cross = [[] for _ in range(len(columns) - 1)] if len(columns) > 1 else []
    left_count = {v: 0 for v in range(lat.n)}
    right_count = {v: 0 for v in range(lat.n)}
    for i, j in lat.edges:
        bi, bj = col_of[i], col_of[j]
        if bi == bj:
            if abs(pos[i] - pos[j]) != 1:
                raise LatticeError(
                    f"edge ({i},{j}) is internal to column {bi} but not chain-adjacent")
            internal[bi].append((i, j))
        elif abs(bi - bj) == 1:
            lo, hi = (i, j) if bi < bj else (j, i)
            right_count[lo] += 1
            left_count[hi] += 1
            cross[min(bi, bj)].append((i, j))
        else:
            raise LatticeError(f"edge ({i},{j}) spans non-adjacent columns")
    for v in range(lat.n):
        if left_count[v] > 1 or right_count[v] > 1:
            raise LatticeError(
                f"vertex {v} has multiple neighbors in one adjacent column")
    return ColumnPartition(
        columns=tuple(tuple(c) for c in columns),
        internal_edges=tuple(tuple(e) for e in internal),
        cross_edges=tuple(tuple(e) for e in cross),
    )
