"""Graph-shaped tensor-network state: one tensor per lattice vertex.

Axis convention: tensors[v] has the physical axis (dimension 2) first, then
one virtual axis per incident edge, ordered by ascending neighbor id.  Bond
dimensions are read off the tensor shapes; the two endpoint tensors of an
edge always agree on the shared dimension.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..lattice import column_partition

DEFAULT_SVD_CUTOFF = 1e-13


class TNError(ValueError):
    pass


@dataclass
class TNState:
    lattice: object
    chi_max: int
    tensors: list
    svd_cutoff: float = DEFAULT_SVD_CUTOFF
    log_scale: float = 0.0   # accumulated rescaling of the overall amplitude
    _axes: dict = field(init=False, repr=False)

    def __post_init__(self):
        self._axes = {}
        for v in range(self.lattice.n):
            for k, u in enumerate(self.lattice.neighbors(v)):
                self._axes[(v, u)] = 1 + k
        self.check_shapes()

    def check_shapes(self):
        for v, t in enumerate(self.tensors):
            nbrs = self.lattice.neighbors(v)
            if t.ndim != 1 + len(nbrs):
                raise TNError(f"tensor {v} has {t.ndim} axes, expected {1 + len(nbrs)}")
            if t.shape[0] != 2:
                raise TNError(f"tensor {v} physical dimension is {t.shape[0]}")
        for i, j in self.lattice.edges:
            if self.bond_dim(i, j) != self.bond_dim(j, i):
                raise TNError(f"bond ({i},{j}) has mismatched dimensions")

    def axis_of(self, v, u):
        """Axis of tensors[v] carrying the bond to neighbor u."""
        return self._axes[(v, u)]

    def bond_dim(self, v, u):
        return self.tensors[v].shape[self.axis_of(v, u)]

    def bond_dims(self):
        return {(i, j): self.bond_dim(i, j) for i, j in self.lattice.edges}

    def max_bond_dim(self):
        dims = list(self.bond_dims().values())
        return max(dims) if dims else 1

    def copy(self):
        return TNState(self.lattice, self.chi_max,
                       [t.copy() for t in self.tensors],
                       svd_cutoff=self.svd_cutoff, log_scale=self.log_scale)


def init_plus(lattice, chi_max) -> TNState:
    """Product of |+> site tensors; every bond has dimension 1, norm exactly 1."""
    if chi_max < 1:
        raise TNError("chi_max must be >= 1")
    tensors = []
    plus = np.array([1.0, 1.0], dtype=np.complex128) / np.sqrt(2.0)
    for v in range(lattice.n):
        shape = (2,) + (1,) * lattice.degree(v)
        tensors.append(plus.reshape(shape).copy())
    return TNState(lattice, chi_max, tensors)


def product_state(lattice, chi_max, z) -> TNState:
    """Computational-basis product state for a +-1 spin vector."""
    tensors = []
    for v in range(lattice.n):
        vec = np.zeros(2, dtype=np.complex128)
        vec[0 if z[v] == 1 else 1] = 1.0
        tensors.append(vec.reshape((2,) + (1,) * lattice.degree(v)))
    return TNState(lattice, chi_max, tensors)


def to_dense(state, max_qubits=20) -> np.ndarray:
    """Contract the network to the full 2^n amplitude vector (small n only).

    Vertices are absorbed in column-partition raster order, which keeps the
    open-bond frontier small on lattice-shaped graphs.  The result follows the
    dense simulator's basis convention (qubit 0 = most significant bit).
    """
    lat = state.lattice
    if lat.n > max_qubits:
        raise TNError(f"dense contraction capped at {max_qubits} qubits")
    part = column_partition(lat)
    order = [v for col in part.columns for v in col]
    acc = np.ones(1, dtype=np.complex128)
    labels = []  # per-axis labels of acc: ("p", v) or ("b", i, j)
    acc = acc.reshape(())
    first = True
    for v in order:
        t = state.tensors[v]
        t_labels = [("p", v)] + [("b",) + tuple(sorted((v, u)))
                                 for u in lat.neighbors(v)]
        if first:
            acc, labels = t, t_labels
            first = False
        else:
            shared = [lab for lab in t_labels if lab in labels]
            a_axes = [labels.index(lab) for lab in shared]
            t_axes = [t_labels.index(lab) for lab in shared]
            acc = np.tensordot(acc, t, axes=(a_axes, t_axes))
            labels = [lab for k, lab in enumerate(labels) if k not in a_axes] + \
                     [lab for k, lab in enumerate(t_labels) if k not in t_axes]
    phys_axes = [labels.index(("p", v)) for v in range(lat.n)]
    acc = np.transpose(acc, phys_axes)
    return acc.reshape(-1) * np.exp(state.log_scale)


def norm_squared_dense(state, max_qubits=20) -> float:
    amps = to_dense(state, max_qubits=max_qubits)
    return float(np.real(np.vdot(amps, amps)))


def save_state(state, path):
    """Checkpoint to an .npz container: per-vertex complex128 arrays in C
    (row-major) order under keys 'tensor_<v>', plus a JSON metadata record."""
    meta = {
        "lattice": json.loads(state.lattice.to_json()),
        "chi_max": state.chi_max,
        "svd_cutoff": state.svd_cutoff,
        "log_scale": state.log_scale,
    }
    arrays = {f"tensor_{v}": np.ascontiguousarray(t, dtype=np.complex128)
              for v, t in enumerate(state.tensors)}
    with open(path, "wb") as fh:
        np.savez(fh, meta=np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8),
                 **arrays)


def load_state(path) -> TNState:
    from ..lattice import Lattice
    with np.load(path) as data:
        meta = json.loads(bytes(data["meta"]).decode())
        lat = Lattice.from_json(json.dumps(meta["lattice"]))
        tensors = [np.asarray(data[f"tensor_{v}"]) for v in range(lat.n)]
    state = TNState(lat, meta["chi_max"], tensors,
                    svd_cutoff=meta["svd_cutoff"], log_scale=meta["log_scale"])
    return state
