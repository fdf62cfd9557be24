"""Small matrix-product utilities used by the boundary environments.

An MPS is a list of (D_left, d, D_right) arrays with unit boundary
dimensions.  Compression runs a QR orthogonalization sweep followed by an SVD
truncation sweep, optionally refined by two-site variational fitting passes
against the uncompressed chain.  Compressed chains are returned unit-norm
together with the log of the extracted scale.

The sweeps sit on the sampler's per-sample hot path, so they use
scipy.linalg primitives with validation switched off and plain matmul
reshapes rather than tensordot.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import qr as _qr
from scipy.linalg import svd as _svd

REFINE_THRESHOLD = 1e-20  # skip variational passes when only numerical noise was cut


class MPSError(RuntimeError):
    pass


def mps_norm(sites) -> float:
    env = np.ones((1, 1), dtype=np.complex128)
    for s in sites:
        env = np.einsum("ab,adc,bde->ce", env, s, s.conj(), optimize=True)
    return float(np.sqrt(max(env.reshape(()).real, 0.0)))


def mps_overlap(a_sites, b_sites) -> complex:
    """<a|b> for equal-length chains with matching physical dimensions."""
    env = np.ones((1, 1), dtype=np.complex128)
    for a, b in zip(a_sites, b_sites):
        env = np.einsum("xy,xdc,yde->ce", env, a.conj(), b, optimize=True)
    return complex(env.reshape(()))


def mps_scalar(sites) -> complex:
    """Contract a chain whose physical dimensions are all 1 to a scalar."""
    vec = np.ones(1, dtype=np.complex128)
    for s in sites:
        vec = vec @ s[:, 0, :]
    return complex(vec[0])


def _qr_sweep(sites):
    """Left-to-right orthogonalization; returns (sites, log_scale)."""
    out = []
    carry = None
    for s in sites:
        dl, d, dr = s.shape
        mat = s.reshape(dl, d * dr)
        if carry is not None:
            mat = carry @ mat
            dl = carry.shape[0]
        q, r = _qr(mat.reshape(dl * d, dr), mode="economic", check_finite=False)
        out.append(q.reshape(dl, d, -1))
        carry = r
    norm = float(np.linalg.norm(carry))
    if norm <= 0.0:
        raise MPSError("chain has zero norm")
    out[-1] = np.matmul(out[-1], carry / norm)
    return out, float(np.log(norm))


def _svd_sweep(sites, max_bond, cutoff):
    """Right-to-left truncation of a left-orthogonal chain.

    Returns (sites, discarded) with discarded the accumulated relative weight
    of the dropped singular values."""
    out = list(sites)
    discarded = 0.0
    for k in range(len(out) - 1, 0, -1):
        dl, d, dr = out[k].shape
        u, sv, vm = _svd(out[k].reshape(dl, d * dr), full_matrices=False,
                         check_finite=False, lapack_driver="gesdd")
        total = float(np.sum(sv ** 2))
        keep = int(np.sum(sv > cutoff * sv[0])) if sv[0] > 0 else 1
        keep = max(1, min(keep, max_bond or keep))
        discarded += float(np.sum(sv[keep:] ** 2) / total) if total > 0 else 0.0
        out[k] = vm[:keep].reshape(keep, d, dr)
        carry = u[:, :keep] * sv[:keep]
        out[k - 1] = np.matmul(out[k - 1], carry)
    return out, discarded


def _two_site_refine(target, sites, max_bond, cutoff, passes):
    """Variational fitting sweeps of `sites` against `target` (fixed)."""
    n = len(sites)
    if n < 2 or passes <= 0:
        return sites
    right = [None] * (n + 1)
    right[n] = np.ones((1, 1), dtype=np.complex128)
    for k in range(n - 1, -1, -1):
        right[k] = np.einsum("adb,xdy,by->ax", sites[k].conj(), target[k],
                             right[k + 1], optimize=True)
    for _ in range(passes):
        left = np.ones((1, 1), dtype=np.complex128)
        for k in range(n - 1):
            block = np.einsum("ax,xdy,yez,bz->adeb", left, target[k],
                              target[k + 1], right[k + 2], optimize=True)
            a, d, e, b = block.shape
            u, sv, vm = _svd(block.reshape(a * d, e * b), full_matrices=False,
                             check_finite=False, lapack_driver="gesdd")
            keep = int(np.sum(sv > cutoff * sv[0])) if sv[0] > 0 else 1
            keep = max(1, min(keep, max_bond or keep))
            sites[k] = u[:, :keep].reshape(a, d, keep)
            sites[k + 1] = (sv[:keep, None] * vm[:keep]).reshape(keep, e, b)
            left = np.einsum("ax,adb,xdy->by", left, sites[k].conj(), target[k],
                             optimize=True)
        # re-orthogonalize so the next pass sees canonical sites
        sites, _ = _qr_sweep(sites)
        for k in range(n - 1, -1, -1):
            right[k] = np.einsum("adb,xdy,by->ax", sites[k].conj(), target[k],
                                 right[k + 1], optimize=True)
    return sites


def mps_compress(sites, max_bond=None, cutoff=1e-14, refine_passes=0):
    """Compress a chain; returns (sites, log_scale, residual).

    The result is unit-norm with the removed scale returned as log_scale.
    residual is the relative L2 distance to the input chain (estimated from
    discarded weights, or exact when refinement passes run).
    """
    if sites[0].shape[0] != 1 or sites[-1].shape[2] != 1:
        raise MPSError("chain must have unit boundary bonds")
    ortho, log_scale = _qr_sweep(sites)
    out, discarded = _svd_sweep(ortho, max_bond, cutoff)
    residual = float(np.sqrt(max(discarded, 0.0)))
    if refine_passes > 0 and max_bond is not None and discarded > REFINE_THRESHOLD:
        out = _two_site_refine(ortho, out, max_bond, cutoff, refine_passes)
        # exact relative distance to the (unit-norm) orthogonalized input
        ov = mps_overlap(out, ortho)
        nrm = mps_norm(out)
        residual = float(np.sqrt(max(1.0 + nrm ** 2 - 2.0 * ov.real, 0.0)))
    norm2 = mps_norm(out)
    if norm2 <= 0.0:
        raise MPSError("compression produced a zero chain")
    out[-1] = out[-1] / norm2
    return out, log_scale + float(np.log(norm2)), residual


def max_bond_dim(sites) -> int:
    return max(max(s.shape[0], s.shape[2]) for s in sites)
