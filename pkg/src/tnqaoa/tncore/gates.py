"""Gate matrices and circuit compilation for the alternating-layer ansatz.

A compiled circuit is a flat list of Gate records.  Per layer j the cost stage
emits, in order: Rz(2 gamma_j d_v) for every field term, the two-qubit
rotation exp(-i gamma_j d_ij Z Z) for every edge term, and for every
three-body term on (l, n1, n2) the sandwich

    CNOT(n1 -> l), CNOT(n2 -> l), Rz(2 gamma_j d) on l,
    CNOT(n2 -> l), CNOT(n1 -> l),

whose product equals exp(-i gamma_j d Z_l Z_n1 Z_n2) while keeping every
two-qubit gate on a lattice edge.  The mixer stage emits Rx(2 beta_j) on
every qubit.

Two-qubit matrices are stored as 4 x 4 arrays whose index order follows
gate.sites with sites[0] as the more significant bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..instance import cost_operator_terms


class CompileError(ValueError):
    pass


@dataclass(frozen=True)
class Gate:
    name: str
    sites: tuple
    matrix: np.ndarray
    layer: int
    stage: str  # "cost" | "mix"


def rx(theta) -> np.ndarray:
    c, s = np.cos(theta / 2.0), -1j * np.sin(theta / 2.0)
    return np.array([[c, s], [s, c]], dtype=np.complex128)


def rz(theta) -> np.ndarray:
    return np.diag([np.exp(-1j * theta / 2.0), np.exp(1j * theta / 2.0)])


def zz_rotation(angle) -> np.ndarray:
    """exp(-i * angle * Z x Z)."""
    ph = np.exp(-1j * angle)
    return np.diag([ph, ph.conjugate(), ph.conjugate(), ph])


def cnot() -> np.ndarray:
    """Controlled NOT with the control on sites[0]."""
    m = np.eye(4, dtype=np.complex128)
    m[[2, 3]] = m[[3, 2]]
    return m


def compile_circuit(instance, schedule):
    """Ordered gate list realizing the full alternating-layer circuit."""
    lat = instance.lattice
    for (l, n1, n2) in instance.cubic:
        if not (lat.has_edge(l, n1) and lat.has_edge(l, n2)):
            raise CompileError(f"three-body term ({l},{n1},{n2}) is not edge-supported")
    singles, pairs, triples = [], [], []
    for sites, d in cost_operator_terms(instance):
        (singles if len(sites) == 1 else pairs if len(sites) == 2 else triples).append(
            (sites, d))
    gates = []
    for j, (gamma, beta) in enumerate(zip(schedule.gammas, schedule.betas), start=1):
        for (v,), d in singles:
            gates.append(Gate("rz", (v,), rz(2.0 * gamma * d), j, "cost"))
        for (a, b), d in pairs:
            gates.append(Gate("zz", (a, b), zz_rotation(gamma * d), j, "cost"))
        for (l, n1, n2), d in triples:
            gates.append(Gate("cnot", (n1, l), cnot(), j, "cost"))
            gates.append(Gate("cnot", (n2, l), cnot(), j, "cost"))
            gates.append(Gate("rz", (l,), rz(2.0 * gamma * d), j, "cost"))
            gates.append(Gate("cnot", (n2, l), cnot(), j, "cost"))
            gates.append(Gate("cnot", (n1, l), cnot(), j, "cost"))
        for v in range(lat.n):
            gates.append(Gate("rx", (v,), rx(2.0 * beta), j, "mix"))
    return gates


def group_by_stage(gates):
    """Split a compiled gate list into consecutive (layer, stage) groups."""
    groups = []
    for g in gates:
        if groups and groups[-1][0] == (g.layer, g.stage):
            groups[-1][1].append(g)
        else:
            groups.append(((g.layer, g.stage), [g]))
    return groups
