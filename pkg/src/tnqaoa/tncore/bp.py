"""Belief propagation on the norm network of a graph tensor-network state.

A message lives on each directed edge (i -> j): a D x D positive
semi-definite matrix indexed by (ket bond, bra bond) of that edge, obtained by
contracting tensor i with its conjugate and all incoming messages except the
one from j.  Messages are kept trace-normalized and Hermitian; convergence is
declared when the largest Frobenius distance between successive normalized
messages drops below the tolerance.

The converged messages provide local environments for gate truncation, local
expectation values (including the three-site strings on W vertices), the
Bethe estimate of <psi|psi>, and per-edge entanglement spectra.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from ..instance import cost_operator_terms

DEFAULT_TOLERANCE = 1e-10
DEFAULT_MAX_ITERS = 100
EIG_CLAMP = 1e-12
PINV_CUTOFF = 1e-12

PAULI_Z = np.diag([1.0, -1.0]).astype(np.complex128)


class BPError(RuntimeError):
    pass


@dataclass
class BPCache:
    messages: dict
    converged: bool
    iterations_used: int
    final_delta: float
    tolerance: float = DEFAULT_TOLERANCE


def identity_message(dim):
    return np.eye(dim, dtype=np.complex128) / dim


def init_messages(state, prior=None):
    """Fresh identity messages, keeping prior entries whose dimension still fits."""
    messages = {}
    for i, j in state.lattice.edges:
        d = state.bond_dim(i, j)
        for key in ((i, j), (j, i)):
            old = None if prior is None else prior.get(key)
            if old is not None and old.shape == (d, d):
                messages[key] = old
            else:
                messages[key] = identity_message(d)
    return messages


def _normalize(m):
    tr = np.trace(m)
    if abs(tr) < 1e-300:
        raise BPError("message trace vanished")
    m = m / tr
    return 0.5 * (m + m.conj().T)


def message_update(state, messages, i, j):
    """Contraction of tensor i, its conjugate and all incoming messages but j's."""
    t = state.tensors[i]
    if not np.all(np.isfinite(t)):
        raise BPError(f"non-finite entries in tensor {i}")
    nbrs = state.lattice.neighbors(i)
    d = t.ndim
    ket = list(range(d))                       # 0 = phys, 1.. = bonds
    bra = [0] + [d + k for k in range(1, d)]   # shared phys, separate bonds
    operands = [t, ket, t.conj(), bra]
    out = None
    for k, u in enumerate(nbrs):
        ax = 1 + k
        if u == j:
            out = [ket[ax], bra[ax]]
            continue
        operands += [messages[(u, i)], [ket[ax], bra[ax]]]
    m = np.einsum(*operands, out, optimize=True)
    return _normalize(m)


def run_bp(state, tolerance=DEFAULT_TOLERANCE, max_iters=DEFAULT_MAX_ITERS,
           damping=0.0, messages=None, schedule="sequential") -> BPCache:
    """Iterate message updates to a fixed point.

    schedule "sequential" applies updates immediately (faster convergence);
    "parallel" uses the previous sweep's messages throughout, which changes
    the iteration path but not the fixed point.
    """
    messages = init_messages(state, prior=messages)
    directed = sorted(messages)
    delta = np.inf
    iters = 0
    for iters in range(1, max_iters + 1):
        delta = 0.0
        source = dict(messages) if schedule == "parallel" else messages
        for (i, j) in directed:
            new = message_update(state, source, i, j)
            if damping > 0.0:
                new = _normalize((1.0 - damping) * new + damping * messages[(i, j)])
            delta = max(delta, float(np.linalg.norm(new - messages[(i, j)])))
            messages[(i, j)] = new
        if delta <= tolerance:
            return BPCache(messages, True, iters, delta, tolerance)
    return BPCache(messages, False, iters, delta, tolerance)


def sqrt_psd(m, clamp=EIG_CLAMP):
    """Hermitian square root with eigenvalue clamping at `clamp` * max."""
    w, u = np.linalg.eigh(0.5 * (m + m.conj().T))
    floor = clamp * max(float(w[-1]), 0.0)
    w = np.clip(w, floor if floor > 0 else 0.0, None)
    return (u * np.sqrt(w)) @ u.conj().T


def pinv_hermitian(m, cutoff=PINV_CUTOFF):
    """Pseudo-inverse of a Hermitian matrix with a relative spectral cutoff."""
    w, u = np.linalg.eigh(0.5 * (m + m.conj().T))
    wmax = max(float(np.abs(w).max()), 1e-300)
    inv = np.where(np.abs(w) > cutoff * wmax, 1.0 / w, 0.0)
    return (u * inv) @ u.conj().T


def min_message_eigenvalue(messages):
    return min(float(np.linalg.eigvalsh(m).min()) for m in messages.values())


def log_bethe_norm(state, messages) -> float:
    """log <psi|psi> in the Bethe approximation (exact on trees)."""
    log_num = 0.0
    for v in range(state.lattice.n):
        t = state.tensors[v]
        d = t.ndim
        ket = list(range(d))
        bra = [0] + [d + k for k in range(1, d)]
        operands = [t, ket, t.conj(), bra]
        for k, u in enumerate(state.lattice.neighbors(v)):
            operands += [messages[(u, v)], [ket[1 + k], bra[1 + k]]]
        z_v = complex(np.einsum(*operands, [], optimize=True))
        if not z_v.real > 0:
            raise BPError(f"non-positive vertex weight at {v}")
        log_num += np.log(z_v.real)
    log_den = 0.0
    for i, j in state.lattice.edges:
        z_e = complex(np.einsum("ab,ab->", messages[(i, j)], messages[(j, i)]))
        if not z_e.real > 0:
            raise BPError(f"non-positive edge weight on ({i},{j})")
        log_den += np.log(z_e.real)
    return log_num - log_den + 2.0 * state.log_scale


def bethe_norm(state, messages) -> float:
    return float(np.exp(log_bethe_norm(state, messages)))


def local_expectation(state, messages, sites, op=PAULI_Z) -> complex:
    """BP expectation of a product of single-site operators on `sites`.

    The sites must induce a connected subgraph; bonds internal to the region
    are contracted directly (both layers), external bonds are closed by the
    incoming messages.  Returns numerator / denominator, where the denominator
    is the same contraction without operators.
    """
    lat = state.lattice
    region = sorted(set(sites))
    next_label = [0]

    def fresh():
        next_label[0] += 1
        return next_label[0] - 1

    ket_bond, bra_bond = {}, {}
    for s in region:
        for u in lat.neighbors(s):
            key = (min(s, u), max(s, u))
            if key not in ket_bond:
                ket_bond[key] = fresh()
                bra_bond[key] = fresh()

    def build(with_ops):
        operands = []
        for s in region:
            t = state.tensors[s]
            pk = fresh()
            if with_ops:
                pb = fresh()
                operands.extend([op, [pb, pk]])
            else:
                pb = pk
            ket_idx = [pk]
            bra_idx = [pb]
            for u in lat.neighbors(s):
                key = (min(s, u), max(s, u))
                ket_idx.append(ket_bond[key])
                bra_idx.append(bra_bond[key])
            operands.extend([t, ket_idx, t.conj(), bra_idx])
            for u in lat.neighbors(s):
                if u in region:
                    continue
                key = (min(s, u), max(s, u))
                operands.extend([messages[(u, s)], [ket_bond[key], bra_bond[key]]])
        return complex(np.einsum(*operands, [], optimize=True))

    den = build(False)
    if abs(den) < 1e-300:
        raise BPError(f"zero local norm on sites {tuple(sites)}")
    num = build(True)
    return num / den


def bp_energy(state, bp, instance, imag_warn=1e-8) -> float:
    """Cost expectation from BP environments, term by term.

    One- and two-site terms contract a single vertex or edge region; the
    three-site terms contract the (n1, l, n2) path jointly.
    """
    messages = bp.messages if isinstance(bp, BPCache) else bp
    total = 0.0 + 0.0j
    for sites, coeff in cost_operator_terms(instance):
        total += coeff * local_expectation(state, messages, sites)
    if abs(total.imag) > imag_warn * max(1.0, abs(total.real)):
        warnings.warn(f"bp_energy imaginary residue {total.imag:.3e}")
    return float(total.real)
