"""Entanglement diagnostics from converged messages.

The two messages on an edge determine an effective entanglement spectrum:
the singular values of sqrt(m_ij)^T sqrt(m_ji), normalized so their squares
sum to one (the state norm is not exactly preserved by truncations, so the
spectrum is taken with respect to a unit-norm state).  The entropy of an
edge is the Shannon entropy (base 2) of the squared spectrum, and the
entanglement across a cut is the sum of its edge entropies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bp import BPCache, sqrt_psd


class EntropyError(RuntimeError):
    pass


@dataclass(frozen=True)
class EdgeSpectrum:
    edge: tuple
    lambdas: tuple      # descending, sum of squares = 1
    entropy: float


@dataclass(frozen=True)
class CutSpec:
    edges: tuple
    entropies: tuple
    s_cut: float


def _messages(bp):
    return bp.messages if isinstance(bp, BPCache) else bp


def edge_entropy(bp, edge) -> EdgeSpectrum:
    messages = _messages(bp)
    i, j = edge
    lam = np.linalg.svd(sqrt_psd(messages[(i, j)]).T @ sqrt_psd(messages[(j, i)]),
                        compute_uv=False)
    total = float(np.sum(lam ** 2))
    if total <= 0.0:
        raise EntropyError(f"all-zero singular spectrum on edge {edge}")
    lam2 = lam ** 2 / total
    lam2 = lam2[lam2 > 0.0]
    s = float(-np.sum(lam2 * np.log2(lam2))) + 0.0  # avoid -0.0
    return EdgeSpectrum(edge=(min(i, j), max(i, j)),
                        lambdas=tuple(np.sqrt(lam2)), entropy=max(s, 0.0))


def cut_entropy(bp, cut_edges) -> CutSpec:
    specs = [edge_entropy(bp, e) for e in cut_edges]
    return CutSpec(edges=tuple(tuple(e) for e in cut_edges),
                   entropies=tuple(s.entropy for s in specs),
                   s_cut=float(sum(s.entropy for s in specs)))


def default_bisection_cut(partition):
    """Edges crossing the middle of the column partition (vertical bisection)."""
    if partition.num_columns < 2:
        return ()
    mid = partition.num_columns // 2
    return tuple(partition.cross_edges[mid - 1])
