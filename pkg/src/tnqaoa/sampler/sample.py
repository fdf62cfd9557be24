"""Column-sweep bitstring sampling with importance weights.

The sweep walks the columns left to right.  At column b the conditional
network is a chain: the projected amplitude environment fused into the
column's ket tensors (carrying the bits fixed so far), its conjugate, and the
norm environment of the columns still to the right.  Bits are drawn
qubit-by-qubit from one-site reduced density matrices; the product of the
conditional probabilities actually used is the proposal probability Q(z).

The target weight P(z) = |<z|psi>|^2 comes from the amplitude chain alone:
after the last column the projected chain contracts to the amplitude of the
drawn bitstring, with every compression capped at rank R_m.  Both P and Q are
accumulated in log domain; omega = P/Q.  Normalized weights omega~ are a
batch-level quantity, filled in once the batch mean of omega is known.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..instance import cost
from .envs import build_norm_envs, realign
from .mps import mps_compress

ABORT_MASS = 1e-300


class SampleAbort(RuntimeError):
    """Raised when a conditional distribution has no usable mass."""


@dataclass
class SampleRecord:
    spins: np.ndarray        # +-1 per vertex id
    log_p: float
    log_q: float
    omega: float
    omega_tilde: float | None = None
    energy: int | None = None


@dataclass
class BatchStats:
    num_samples: int
    mean_omega: float
    var_omega: float
    var_omega_tilde: float
    aborts: int = 0


def _amplitude_chain(m_sites, kets, rank, cutoff):
    """Fuse the amplitude environment into a column; compress to rank R_m.

    Returns (sites, log_scale) with sites[k] of shape (B_up, 2, r, B_dn).
    """
    raw = []
    r_dims = []
    for m, t in zip(m_sites, kets):
        # m: (mu_up, l, mu_dn); t: (p, u, l, r, d)
        x = np.tensordot(m, t, axes=([1], [2]))       # (mu_up, mu_dn, p, u, r, d)
        x = np.transpose(x, (3, 0, 2, 4, 5, 1))       # (u, mu_up, p, r, d, mu_dn)
        u, mu, p, r, d, md = x.shape
        raw.append(np.ascontiguousarray(x).reshape(u * mu, p * r, d * md))
        r_dims.append(r)
    sites, log_scale, _ = mps_compress(raw, max_bond=rank, cutoff=cutoff)
    out = [s.reshape(s.shape[0], 2, r, s.shape[2]) for s, r in zip(sites, r_dims)]
    return out, log_scale


def _env_views(env_sites, r_dims):
    """Reshape each (nu, r^2, nu') env site to (nu, r, r, nu')."""
    return [e.reshape(e.shape[0], r, r, e.shape[2])
            for e, r in zip(env_sites, r_dims)]


def _sample_column(chain, env4, rng, log_q):
    """Draw the column's bits; returns (bits, projected chain, log_q).

    Rail convention: partial contractions carry (ket bond, bra bond, env bond).
    Right partials are contracted rails-first so no ket x env outer product is
    ever materialized.
    """
    K = len(chain)
    parts = [None] * (K + 1)
    cross = [None] * K   # ket x right-part x env, reused by the RDM sweep
    parts[K] = np.ones((1, 1, 1), dtype=np.complex128)
    for k in range(K - 1, -1, -1):
        a = chain[k]     # (B, p, r, B')
        e = env4[k]      # (nu, r, rb, nu')
        # (B,p,r,B') x (B~,C~,nu~) over B' -> (B,p,r,C~,nu~)
        x = np.tensordot(a, parts[k + 1], axes=([3], [0]))
        # over (r, nu~) with env -> (B,p,C~,nu,rb)
        x = np.tensordot(x, e, axes=([2, 4], [1, 3]))
        cross[k] = x
        # close the bra: conj a (C,p,rb,C~) over (p, C~, rb) -> (B,nu,C)
        y = np.tensordot(x, a.conj(), axes=([1, 2, 4], [1, 3, 2]))
        parts[k] = np.transpose(y, (0, 2, 1))
    bits = []
    projected = []
    left = np.ones((1, 1, 1), dtype=np.complex128)
    for k in range(K):
        a = chain[k]
        e = env4[k]
        # rho[p, q] from left and cross (ket side incl. env and right part)
        x = np.tensordot(left, cross[k], axes=([0, 2], [0, 3]))   # (C, p, C~, rb)
        rho = np.tensordot(x, a.conj(), axes=([0, 3, 2], [0, 2, 3]))
        probs = np.clip(np.real(np.diag(rho)), 0.0, None)
        total = float(probs.sum())
        if not total > ABORT_MASS:
            raise SampleAbort(f"conditional mass {total:.3e} at column position {k}")
        p0 = probs[0] / total
        bit = 0 if rng.random() < p0 else 1
        log_q += float(np.log(probs[bit] / total))
        bits.append(bit)
        sel = a[:, bit, :, :]                                     # (B, r, B')
        projected.append(sel)
        x = np.tensordot(left, sel, axes=([0], [0]))              # (C, nu, r, B')
        x = np.tensordot(x, e, axes=([1, 2], [0, 1]))             # (C, B', rb, nu')
        x = np.tensordot(x, sel.conj(), axes=([0, 2], [0, 1]))    # (B', nu', C')
        left = np.transpose(x, (0, 2, 1))
    return bits, projected, log_q


def sample_one(state, envs, rank, rng, cutoff=1e-14) -> SampleRecord:
    """Draw a single bitstring with its proposal and target weights."""
    _attach_views(envs)
    layouts = envs.layouts
    nb = len(layouts)
    n = state.lattice.n
    spins = np.zeros(n, dtype=np.int8)
    log_q = 0.0
    log_amp_scale = float(state.log_scale)
    m_sites = [np.ones((1, 1, 1), dtype=np.complex128) for _ in layouts[0].verts]
    amp = None
    for b in range(nb):
        lay = layouts[b]
        chain, log_sc = _amplitude_chain(m_sites, envs.ket[b], rank, cutoff)
        log_amp_scale += log_sc
        env4 = envs.env_views[b]
        bits, projected, log_q = _sample_column(chain, env4, rng, log_q)
        for k, v in enumerate(lay.verts):
            spins[v] = 1 - 2 * bits[k]
        if b + 1 < nb:
            m_sites = realign(projected, lay.right_edges, layouts[b + 1].left_edges)
        else:
            vec = np.ones(1, dtype=np.complex128)
            for s in projected:
                vec = vec @ s[:, 0, :]
            amp = complex(vec[0])
    mag = abs(amp)
    if mag <= 0.0:
        raise SampleAbort("zero amplitude for the drawn bitstring")
    log_p = 2.0 * (float(np.log(mag)) + log_amp_scale)
    omega = float(np.exp(log_p - log_q))
    return SampleRecord(spins=spins, log_p=log_p, log_q=log_q, omega=omega)


def _attach_views(envs):
    if not hasattr(envs, "env_views") or envs.env_views is None:
        views = []
        for b, lay in enumerate(envs.layouts):
            r_dims = [t.shape[3] for t in envs.ket[b]]
            views.append(_env_views(envs.env[b], r_dims))
        envs.env_views = views
    return envs


def sample_batch(state, rank_amplitude, rank_norm, num_samples, seed,
                 instance=None, envs=None, cutoff=1e-14, refine_passes=2):
    """Build environments once and draw num_samples independent samples.

    Each sample uses its own generator spawned from the batch seed, so results
    are reproducible regardless of how samples might be distributed over
    workers.  Returns (records, stats); aborted samples are dropped from the
    records and counted in stats.aborts.
    """
    if num_samples < 1:
        raise ValueError("need at least one sample")
    if envs is None:
        envs = build_norm_envs(state, rank=rank_norm, cutoff=cutoff,
                               refine_passes=refine_passes)
    _attach_views(envs)
    seqs = np.random.SeedSequence(seed).spawn(num_samples)
    records = []
    aborts = 0
    for sq in seqs:
        rng = np.random.default_rng(sq)
        try:
            rec = sample_one(state, envs, rank_amplitude, rng, cutoff=cutoff)
        except SampleAbort:
            aborts += 1
            continue
        if instance is not None:
            rec.energy = cost(instance, rec.spins)
        records.append(rec)
    if not records:
        raise SampleAbort("every sample in the batch aborted")
    omegas = np.array([r.omega for r in records])
    mean = float(omegas.mean())
    tilde = omegas / mean
    for r, w in zip(records, tilde):
        r.omega_tilde = float(w)
    stats = BatchStats(num_samples=len(records), mean_omega=mean,
                       var_omega=float(omegas.var()),
                       var_omega_tilde=float(tilde.var()), aborts=aborts)
    return records, stats


def weight_diagnostics(records, bins=40):
    """Histogram-ready summaries of a batch: weight moments and binned counts."""
    if not records:
        raise ValueError("empty batch")
    omegas = np.array([r.omega for r in records])
    mean = float(omegas.mean())
    tilde = omegas / mean
    out = {
        "mean_omega": mean,
        "var_omega": float(omegas.var()),
        "var_omega_tilde": float(tilde.var()),
        "hist_omega": _hist(omegas, bins),
        "hist_omega_tilde": _hist(tilde, bins),
    }
    energies = [r.energy for r in records if r.energy is not None]
    if energies:
        e = np.asarray(energies, dtype=float)
        lo, hi = e.min(), e.max()
        edges = np.arange(lo - 0.5, hi + 1.5)  # integer energies: unit bins
        counts, edges = np.histogram(e, bins=edges)
        out["hist_energy"] = (edges.tolist(), counts.tolist())
        out["mean_energy"] = float(e.mean())
        out["min_energy"] = int(e.min())
    return out


def bootstrap_var_omega(records, num_resamples=200, seed=0):
    """Bootstrap standard error of Var(omega) over a batch."""
    omegas = np.array([r.omega for r in records])
    rng = np.random.default_rng(seed)
    vs = np.empty(num_resamples)
    for i in range(num_resamples):
        vs[i] = omegas[rng.integers(0, len(omegas), len(omegas))].var()
    return float(vs.std())


def _hist(values, bins):
    counts, edges = np.histogram(values, bins=bins)
    return (edges.tolist(), counts.tolist())
