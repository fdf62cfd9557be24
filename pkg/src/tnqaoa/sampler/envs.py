"""Boundary environments: column layouts and the right-to-left norm sweep.

Every column of the partition is a chain; each vertex in it has at most one
neighbor in the previous column (its left edge), at most one in the next
column (right edge), and intra-column neighbors only at adjacent chain
positions.  Site tensors are re-oriented to the canonical axis order
(phys, up, left, right, down) with unit dummy axes where a leg is absent.

The norm environment of column b is an MPS, aligned position-by-position with
column b, whose physical legs are the doubled right-edge bonds: it
approximates the contraction of <psi|psi> over all columns to the right of b.
It is built by absorbing one doubled column at a time into the running chain
and compressing to rank R_M, with the extracted scale tracked in log domain
and the per-column compression residual recorded.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..lattice import column_partition
from .mps import mps_compress


class EnvError(RuntimeError):
    pass


@dataclass(frozen=True)
class ColumnLayout:
    verts: tuple        # chain order (ascending y)
    left_edges: tuple   # per position: (u, v) with u in previous column, or None
    right_edges: tuple  # per position: (v, w) with w in next column, or None


def build_layouts(lattice):
    """Column layouts for a lattice; also returns the partition."""
    part = column_partition(lattice)
    col_of = {}
    for b, col in enumerate(part.columns):
        for v in col:
            col_of[v] = b
    layouts = []
    for b, col in enumerate(part.columns):
        left, right = [], []
        for v in col:
            le = re = None
            for u in lattice.neighbors(v):
                if col_of[u] == b - 1:
                    le = (u, v)
                elif col_of[u] == b + 1:
                    re = (v, u)
            left.append(le)
            right.append(re)
        layouts.append(ColumnLayout(tuple(col), tuple(left), tuple(right)))
    return part, layouts


def oriented_tensor(state, layouts, b, k):
    """Site tensor at column b, position k with axes (phys, up, left, right, down)."""
    lay = layouts[b]
    v = lay.verts[k]
    t = state.tensors[v]
    perm = [0]
    have = {0}
    roles = []
    up = lay.verts[k - 1] if k > 0 else None
    down = lay.verts[k + 1] if k + 1 < len(lay.verts) else None
    for role, u in (("up", up), ("left", lay.left_edges[k]),
                    ("right", lay.right_edges[k]), ("down", down)):
        if role in ("left", "right"):
            u = None if u is None else (u[0] if role == "left" else u[1])
        if u is not None and state.lattice.has_edge(v, u):
            ax = state.axis_of(v, u)
            perm.append(ax)
            have.add(ax)
            roles.append(True)
        else:
            roles.append(False)
    if len(have) != t.ndim:
        raise EnvError(f"vertex {v} has a neighbor outside the expected roles")
    t = np.transpose(t, perm)
    shape = [2]
    dim_iter = iter(t.shape[1:])
    for present in roles:
        shape.append(next(dim_iter) if present else 1)
    return t.reshape(shape)


def double_tensor(t):
    """Fuse a (p, u, l, r, d) tensor with its conjugate into (u^2, l^2, r^2, d^2)."""
    d = np.einsum("pulrd,pULRD->uUlLrRdD", t, t.conj(), optimize=True)
    s = t.shape
    return d.reshape(s[1] ** 2, s[2] ** 2, s[3] ** 2, s[4] ** 2)


def realign(sites, tags, next_left_edges):
    """Re-index env/amplitude sites from producer to consumer column positions.

    sites: chain of (D_up, phys, D_dn); tags[k] is the crossing edge the site's
    physical leg lives on, or None (phys dim 1, to be squeezed away).  The
    consumer column expects one site per position, tagged by its left edge;
    positions without a left edge receive identity dummy sites.
    """
    squeezed = []
    pending = None  # accumulated matrix to absorb into the next real site
    for s, tag in zip(sites, tags):
        if tag is None:
            if s.shape[1] != 1:
                raise EnvError("untagged site with non-trivial physical leg")
            mat = s[:, 0, :]
            pending = mat if pending is None else pending @ mat
        else:
            if pending is not None:
                s = np.tensordot(pending, s, axes=([1], [0]))
                pending = None
            squeezed.append((tag, s))
    if pending is not None:
        if not squeezed:
            # no crossing edges would mean a disconnected lattice
            raise EnvError("producer column has no tagged sites")
        tag, s = squeezed[-1]
        squeezed[-1] = (tag, np.tensordot(s, pending, axes=([2], [0])))
    out = []
    idx = 0
    bond = 1
    for le in next_left_edges:
        if le is None:
            out.append(np.eye(bond, dtype=np.complex128).reshape(bond, 1, bond))
        else:
            if idx >= len(squeezed) or squeezed[idx][0] != le:
                raise EnvError(f"crossing-edge order mismatch at {le}")
            s = squeezed[idx][1]
            out.append(s)
            bond = s.shape[2]
            idx += 1
    if idx != len(squeezed):
        raise EnvError("unconsumed crossing-edge sites during realignment")
    return out


@dataclass
class BoundaryEnvs:
    """Right-to-left norm environments plus cached per-column ket tensors."""

    partition: object
    layouts: list
    rank: int | None
    cutoff: float
    refine_passes: int
    env: list = field(default_factory=list)         # env[b]: sites aligned to column b
    log_scale: list = field(default_factory=list)   # cumulative, doubled-layer units
    residuals: list = field(default_factory=list)
    ket: list = field(default_factory=list)         # ket[b][k]: (p, u, l, r, d)
    env_views: list | None = None                   # cached (nu, r, r, nu') reshapes

    def num_columns(self):
        return len(self.layouts)


def build_norm_envs(state, partition=None, rank=None, cutoff=1e-14,
                    refine_passes=2) -> BoundaryEnvs:
    """Build all norm environments for a state (rank None means uncapped)."""
    part, layouts = build_layouts(state.lattice)
    if partition is not None and tuple(partition.columns) != tuple(part.columns):
        raise EnvError("partition does not match the lattice embedding")
    if rank is not None and rank < 1:
        raise EnvError("norm rank must be >= 1 (or None for uncapped)")
    nb = len(layouts)
    envs = BoundaryEnvs(partition=part, layouts=layouts, rank=rank,
                        cutoff=cutoff, refine_passes=refine_passes)
    envs.ket = [[oriented_tensor(state, layouts, b, k)
                 for k in range(len(layouts[b].verts))] for b in range(nb)]
    envs.env = [None] * nb
    envs.log_scale = [0.0] * nb
    envs.residuals = [0.0] * nb
    # rightmost column: nothing to its right
    last = layouts[nb - 1]
    envs.env[nb - 1] = [np.ones((1, 1, 1), dtype=np.complex128)
                        for _ in last.verts]
    for b in range(nb - 2, -1, -1):
        lay = layouts[b + 1]
        sites = []
        for k in range(len(lay.verts)):
            dbl = double_tensor(envs.ket[b + 1][k])   # (u2, l2, r2, d2)
            e = envs.env[b + 1][k]                    # (nu_up, r2, nu_dn)
            x = np.tensordot(dbl, e, axes=([2], [1]))  # (u2, l2, d2, nu_up, nu_dn)
            x = np.transpose(x, (0, 3, 1, 2, 4))       # (u2, nu_up, l2, d2, nu_dn)
            u2, nu, l2, d2, nd = x.shape
            sites.append(x.reshape(u2 * nu, l2, d2 * nd))
        sites, log_sc, res = mps_compress(sites, max_bond=rank, cutoff=cutoff,
                                          refine_passes=refine_passes)
        envs.env[b] = realign(sites, lay.left_edges, layouts[b].right_edges)
        envs.log_scale[b] = envs.log_scale[b + 1] + log_sc
        envs.residuals[b] = res
    return envs


def env_norm_estimate(state, envs) -> float:
    """<psi|psi> from the column-0 transfer chain and its environment."""
    lay0 = envs.layouts[0]
    vec = np.ones((1, 1), dtype=np.complex128)  # (d2 bond, nu bond)
    for k in range(len(lay0.verts)):
        dbl = double_tensor(envs.ket[0][k])       # (u2, l2=1, r2, d2)
        dbl = dbl[:, 0, :, :]                     # (u2, r2, d2)
        e = envs.env[0][k]                        # (nu_up, r2, nu_dn)
        x = np.tensordot(dbl, e, axes=([1], [1]))  # (u2, d2, nu_up, nu_dn)
        vec = np.einsum("un,udnm->dm", vec, x, optimize=True)
    val = float(vec.reshape(()).real)
    return val * float(np.exp(envs.log_scale[0] + 2.0 * state.log_scale))
