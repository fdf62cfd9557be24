"""Gate application with environment-gauged truncation, and circuit evolution.

Two-qubit gates are applied in the gauge set by the current messages: the
Hermitian square roots of the incoming messages are absorbed on all external
bonds of the two sites, the pair is reduced by QR, the gate is contracted and
split by SVD truncated to chi_max, and the external bonds are restored with
pseudo-inverses of the absorbed roots.  Conditioned on the message
environment, this keeps the dominant singular vectors of the bond; without
truncation it is exact for any invertible environment.

`evolve` drives a compiled circuit through the state, re-converging the
messages after every cost stage (single-qubit mixer stages leave the norm
network, and hence the messages, invariant) and recording per-stage
diagnostics: truncation weight, a Bethe norm estimate and the entanglement
across a bisecting cut.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from ..lattice import column_partition
from . import bp as bp_mod
from .bp import BPCache, identity_message, pinv_hermitian, sqrt_psd
from .entropy import cut_entropy, default_bisection_cut
from .gates import compile_circuit, group_by_stage


class GateError(ValueError):
    pass


@dataclass
class TruncationInfo:
    discarded_weight: float   # sum of dropped singular values squared, relative
    bond_dim: int
    edge: tuple | None = None


@dataclass
class StepRecord:
    step: int
    layer: int
    stage: str
    fraction: float           # layer / p
    truncation_weight: float
    norm_estimate: float
    s_cut: float
    bp_converged: bool
    bp_iterations: int
    bp_delta: float


@dataclass
class EvolveResult:
    state: object
    records: list
    bp: BPCache
    cut_edges: tuple = field(default_factory=tuple)

    @property
    def total_truncation_weight(self):
        return sum(r.truncation_weight for r in self.records)


def _absorb(tensor, axis, mat):
    """Contract mat over the given axis: new[..., b, ...] = mat[b, a] T[..., a, ...]."""
    moved = np.tensordot(mat, tensor, axes=([1], [axis]))
    return np.moveaxis(moved, 0, axis)


def _reduce_qr(t, ax):
    """Split t = Q * R with R carrying (phys, bond ax); returns (Q, R, perm)."""
    perm = [a for a in range(t.ndim) if a not in (0, ax)] + [0, ax]
    ext_shape = tuple(t.shape[a] for a in perm[:-2])
    mat = np.transpose(t, perm).reshape(
        int(np.prod(ext_shape, dtype=np.int64)), 2 * t.shape[ax])
    q, r = np.linalg.qr(mat)
    return q, r.reshape(r.shape[0], 2, t.shape[ax]), perm, ext_shape


def _rebuild(q, ext_shape, half_mat, keep, perm):
    """Reattach Q to the updated reduced tensor and undo the permutation."""
    new = (q @ half_mat).reshape(ext_shape + (2, keep))
    inv = np.empty(len(perm), dtype=int)
    for pos, axis in enumerate(perm):
        inv[axis] = pos
    return np.transpose(new, inv)


def apply_gate(state, bp, gate) -> TruncationInfo:
    """Apply one gate in place; returns the truncation record.

    bp may be a BPCache, a raw message dict, or None (identity environment).
    After a two-qubit gate the messages on the gated edge are re-initialized
    to match the new bond dimension and the cache is marked stale.
    """
    messages = None
    cache = None
    if isinstance(bp, BPCache):
        cache, messages = bp, bp.messages
    elif isinstance(bp, dict):
        messages = bp

    unitary_err = np.linalg.norm(
        gate.matrix.conj().T @ gate.matrix - np.eye(gate.matrix.shape[0]))
    if unitary_err > 1e-10:
        warnings.warn(f"gate {gate.name} on {gate.sites} deviates from unitarity "
                      f"by {unitary_err:.2e}")

    if len(gate.sites) == 1:
        v = gate.sites[0]
        state.tensors[v] = np.tensordot(gate.matrix, state.tensors[v], axes=([1], [0]))
        return TruncationInfo(0.0, 0)

    s1, s2 = gate.sites
    lat = state.lattice
    if not lat.has_edge(s1, s2):
        raise GateError(f"two-qubit gate on non-edge ({s1},{s2})")

    restore = {s1: [], s2: []}

    def gauge_in(s, other):
        t = state.tensors[s]
        for u in lat.neighbors(s):
            if u == other:
                continue
            ax = state.axis_of(s, u)
            m = None if messages is None else messages.get((u, s))
            if m is None or m.shape[0] != t.shape[ax]:
                continue
            w = sqrt_psd(m)
            t = _absorb(t, ax, w)
            restore[s].append((ax, pinv_hermitian(w)))
        return t

    t1 = gauge_in(s1, s2)
    t2 = gauge_in(s2, s1)
    q1, r1, perm1, ext1 = _reduce_qr(t1, state.axis_of(s1, s2))
    q2, r2, perm2, ext2 = _reduce_qr(t2, state.axis_of(s2, s1))

    u4 = gate.matrix.reshape(2, 2, 2, 2)  # (out1, out2, in1, in2)
    a_dim, b_dim = r1.shape[0], r2.shape[0]
    theta = np.einsum("apc,bqc,xypq->xayb", r1, r2, u4, optimize=True)
    theta = theta.reshape(2 * a_dim, 2 * b_dim)
    um, sv, vm = np.linalg.svd(theta, full_matrices=False)

    total = float(np.sum(sv ** 2))
    if total <= 0.0:
        raise GateError(f"vanishing two-site block on ({s1},{s2})")
    keep = int(np.sum(sv > state.svd_cutoff * sv[0]))
    keep = max(1, min(keep, state.chi_max))
    discarded = float(np.sum(sv[keep:] ** 2) / total)
    root = np.sqrt(sv[:keep])
    # left: (2, a_dim, keep) -> (a_dim, 2*keep); right: (keep, 2, b_dim) -> (b_dim, 2*keep)
    left = (um[:, :keep] * root).reshape(2, a_dim, keep)
    right = (root[:, None] * vm[:keep, :]).reshape(keep, 2, b_dim)
    left_mat = np.transpose(left, (1, 0, 2)).reshape(a_dim, 2 * keep)
    right_mat = np.transpose(right, (2, 1, 0)).reshape(b_dim, 2 * keep)

    new1 = _rebuild(q1, ext1, left_mat, keep, perm1)
    new2 = _rebuild(q2, ext2, right_mat, keep, perm2)

    for s, new in ((s1, new1), (s2, new2)):
        for ax, winv in restore[s]:
            new = _absorb(new, ax, winv)
        state.tensors[s] = new

    if messages is not None:
        messages[(s1, s2)] = identity_message(keep)
        messages[(s2, s1)] = identity_message(keep)
    if cache is not None:
        cache.converged = False
    return TruncationInfo(discarded, keep, (min(s1, s2), max(s1, s2)))


def refresh_bp(state, cache=None, tolerance=bp_mod.DEFAULT_TOLERANCE,
               max_iters=bp_mod.DEFAULT_MAX_ITERS, damping=0.0, retries=1):
    """(Re-)converge messages, warm-starting from the cache; on failure retry
    with damping before giving up with a warning."""
    prior = cache.messages if cache is not None else None
    result = bp_mod.run_bp(state, tolerance=tolerance, max_iters=max_iters,
                           damping=damping, messages=prior)
    attempt = 0
    while not result.converged and attempt < retries:
        attempt += 1
        result = bp_mod.run_bp(state, tolerance=tolerance,
                               max_iters=2 * max_iters,
                               damping=max(damping, 0.5), messages=result.messages)
    if not result.converged:
        warnings.warn("belief propagation did not converge "
                      f"(delta {result.final_delta:.2e})")
    return result


def evolve(state, instance, schedule, bp_tolerance=bp_mod.DEFAULT_TOLERANCE,
           bp_max_iters=bp_mod.DEFAULT_MAX_ITERS, bp_damping=0.0,
           bp_retries=1, refresh="layer", cut_edges=None) -> EvolveResult:
    """Run the full compiled circuit through the state (mutated in place).

    refresh "layer" re-converges messages after each cost stage (mixer stages
    are single-qubit unitaries and leave messages unchanged), "gate" after
    every two-qubit gate, "never" keeps the initial messages throughout.
    A depth-0 schedule returns the untouched initial state.
    """
    if state.lattice != instance.lattice:
        raise GateError("state and instance live on different lattices")
    if cut_edges is None:
        cut_edges = default_bisection_cut(column_partition(state.lattice))
    cache = refresh_bp(state, None, bp_tolerance, bp_max_iters, bp_damping, bp_retries)
    records = []
    if schedule.p == 0:
        return EvolveResult(state, records, cache, tuple(cut_edges))
    gates = compile_circuit(instance, schedule)
    p = schedule.p
    for step, ((layer, stage), group) in enumerate(group_by_stage(gates), start=1):
        weight = 0.0
        touched = False
        for gate in group:
            info = apply_gate(state, cache, gate)
            weight += info.discarded_weight
            touched = touched or len(gate.sites) == 2
            if refresh == "gate" and len(gate.sites) == 2:
                cache = refresh_bp(state, cache, bp_tolerance, bp_max_iters,
                                   bp_damping, bp_retries)
        if touched and refresh != "never":
            cache = refresh_bp(state, cache, bp_tolerance, bp_max_iters,
                               bp_damping, bp_retries)
        norm_est = bp_mod.bethe_norm(state, cache.messages)
        spec = cut_entropy(cache.messages, cut_edges)
        records.append(StepRecord(
            step=step, layer=layer, stage=stage, fraction=layer / p,
            truncation_weight=weight, norm_estimate=norm_est, s_cut=spec.s_cut,
            bp_converged=cache.converged, bp_iterations=cache.iterations_used,
            bp_delta=cache.final_delta))
    return EvolveResult(state, records, cache, tuple(cut_edges))
