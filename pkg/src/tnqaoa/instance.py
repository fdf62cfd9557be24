"""Seeded random spin-glass instances and exact ground-state search.

Couplings are always +-1.  Heavy-hex-class instances carry a field on every
vertex, a coupling on every edge and a three-body coupling on every W vertex
(degree-2 vertex between two degree-3 vertices); square-lattice instances
carry edge couplings only.  The cost of a spin vector z in {+-1}^n is

    C(z) = sum_v d_v z_v + sum_(i,j) d_ij z_i z_j + sum_l d_l z_l z_n1 z_n2

with the last two sums ranging over the edge set and the W set.  All
evaluation is exact integer arithmetic.

Coefficients are drawn from Philox, a counter-based generator, keyed by
(class_index * 2^64 + seed) with class_index 0/1/2 for linear/quadratic/cubic
coefficients.  Draws are consumed in sorted key order (vertices ascending,
edges lexicographic, W vertices ascending), so the same (lattice, seed) pair
reproduces the same instance bit-exactly on any platform.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .lattice import Lattice, classify_vertices

_CLASS_LINEAR, _CLASS_QUADRATIC, _CLASS_CUBIC = 0, 1, 2
BRUTE_FORCE_CAP = 26
MAX_REPRESENTATIVES = 1024


@dataclass(frozen=True)
class SpinGlassInstance:
    lattice: Lattice
    seed: int
    linear: dict      # vertex -> +-1 (empty on square lattices)
    quadratic: dict   # (i, j) with i < j -> +-1
    cubic: dict       # (l, n1, n2) with n1 < n2 -> +-1

    @property
    def n(self):
        return self.lattice.n

    def to_json(self):
        return json.dumps({
            "lattice_ref": json.loads(self.lattice.to_json()),
            "seed": self.seed,
            "linear": [[v, d] for v, d in sorted(self.linear.items())],
            "quadratic": [[i, j, d] for (i, j), d in sorted(self.quadratic.items())],
            "cubic": [[l, n1, n2, d] for (l, n1, n2), d in sorted(self.cubic.items())],
        })

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        lat = Lattice.from_json(json.dumps(doc["lattice_ref"]))
        return cls(
            lattice=lat,
            seed=doc["seed"],
            linear={v: d for v, d in doc["linear"]},
            quadratic={(i, j): d for i, j, d in doc["quadratic"]},
            cubic={(l, n1, n2): d for l, n1, n2, d in doc["cubic"]},
        )


@dataclass(frozen=True)
class GroundTruth:
    """Exact optimum of an instance: energy, number of minimizers, and up to
    MAX_REPRESENTATIVES of them as +-1 tuples."""

    optimal_energy: int
    count: int
    representatives: tuple


def _pm1_draws(seed, class_index, count):
    key = (int(class_index) << 64) + (int(seed) & ((1 << 64) - 1))
    rng = np.random.Generator(np.random.Philox(key=key))
    return 1 - 2 * rng.integers(0, 2, size=count, dtype=np.int64)


def random_instance(lattice, seed) -> SpinGlassInstance:
    """Draw i.i.d. +-1 coefficients for every term the lattice class carries."""
    if lattice.kind == "square":
        linear, cubic = {}, {}
    else:
        cls = classify_vertices(lattice)
        verts = list(range(lattice.n))
        draws = _pm1_draws(seed, _CLASS_LINEAR, len(verts))
        linear = {v: int(d) for v, d in zip(verts, draws)}
        wkeys = [(l,) + cls.w_pairs[l] for l in sorted(cls.w)]
        draws = _pm1_draws(seed, _CLASS_CUBIC, len(wkeys))
        cubic = {k: int(d) for k, d in zip(wkeys, draws)}
    edges = list(lattice.edges)
    draws = _pm1_draws(seed, _CLASS_QUADRATIC, len(edges))
    quadratic = {e: int(d) for e, d in zip(edges, draws)}
    return SpinGlassInstance(lattice=lattice, seed=int(seed),
                             linear=linear, quadratic=quadratic, cubic=cubic)


def _check_spins(instance, z):
    z = np.asarray(z)
    if z.shape != (instance.n,):
        raise ValueError(f"spin vector has shape {z.shape}, expected ({instance.n},)")
    if not np.all(np.abs(z) == 1):
        raise ValueError("spin entries must be +-1")
    return z.astype(np.int64)


def cost(instance, z) -> int:
    """Exact integer energy of a +-1 spin vector."""
    z = _check_spins(instance, z)
    e = 0
    for v, d in instance.linear.items():
        e += d * z[v]
    for (i, j), d in instance.quadratic.items():
        e += d * z[i] * z[j]
    for (l, n1, n2), d in instance.cubic.items():
        e += d * z[l] * z[n1] * z[n2]
    return int(e)


def cost_operator_terms(instance):
    """Flat list of (support, coefficient) with 1-, 2- and 3-local Z strings."""
    terms = []
    for v, d in sorted(instance.linear.items()):
        terms.append(((v,), d))
    for (i, j), d in sorted(instance.quadratic.items()):
        terms.append(((i, j), d))
    for (l, n1, n2), d in sorted(instance.cubic.items()):
        terms.append(((l, n1, n2), d))
    return terms


def term_masks(instance):
    """Bit masks of the terms for vectorized evaluation over basis indices.

    Qubit v maps to bit (n-1-v) of the basis index, so that index 0 is the
    all |0> (all spin +1) state; bit 0 means spin +1, bit 1 spin -1.
    """
    n = instance.n
    masks, coeffs = [], []
    for sites, d in cost_operator_terms(instance):
        m = 0
        for v in sites:
            m |= 1 << (n - 1 - v)
        masks.append(m)
        coeffs.append(d)
    return np.asarray(masks, dtype=np.uint64), np.asarray(coeffs, dtype=np.int64)


def cost_values(instance, indices) -> np.ndarray:
    """Energies C(z) for basis indices, vectorized (int64)."""
    masks, coeffs = term_masks(instance)
    indices = np.asarray(indices, dtype=np.uint64)
    out = np.zeros(indices.shape, dtype=np.int64)
    for m, d in zip(masks, coeffs):
        parity = (np.bitwise_count(indices & m) & np.uint64(1)).astype(np.int64)
        out += d * (1 - 2 * parity)
    return out


def index_to_spins(k, n):
    """Basis index -> +-1 spin vector (qubit 0 is the most significant bit)."""
    bits = (int(k) >> np.arange(n - 1, -1, -1)) & 1
    return (1 - 2 * bits).astype(np.int8)


def spins_to_index(z):
    """+-1 spin vector -> basis index."""
    bits = (1 - np.asarray(z, dtype=np.int64)) // 2
    k = 0
    for b in bits:
        k = (k << 1) | int(b)
    return k


def brute_force(instance, cap=BRUTE_FORCE_CAP,
                max_representatives=MAX_REPRESENTATIVES) -> GroundTruth:
    """Exhaustive minimum over all 2^n spin vectors (n <= cap)."""
    n = instance.n
    if n > cap:
        raise ValueError(f"brute force capped at n = {cap}, got n = {n}")
    best = None
    count = 0
    reps = []
    chunk = 1 << min(n, 20)
    for start in range(0, 1 << n, chunk):
        idx = np.arange(start, min(start + chunk, 1 << n), dtype=np.uint64)
        e = cost_values(instance, idx)
        lo = int(e.min())
        if best is None or lo < best:
            best, count, reps = lo, 0, []
        if lo <= best:
            hits = idx[e == best]
            count += len(hits)
            for k in hits[: max(0, max_representatives - len(reps))]:
                reps.append(tuple(int(s) for s in index_to_spins(int(k), n)))
    return GroundTruth(optimal_energy=best, count=count, representatives=tuple(reps))
