"""Dense state-vector simulator: the exact oracle for small systems.

Basis convention: qubit 0 is the most significant bit of the basis index,
bit 0 means spin +1 (so Z|0> = +|0>).  The cost layer is applied as a single
diagonal pass using the integer energies C(z): phases are looked up from a
table over the (small) set of attainable integer energies, which makes deep
schedules cheap.  The mixer layer applies e^{-i beta X} to every qubit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .instance import cost_values, index_to_spins, spins_to_index

DEFAULT_QUBIT_CAP = 24


class StateError(ValueError):
    pass


@dataclass
class DenseState:
    amplitudes: np.ndarray   # complex128, length 2^n
    n: int

    def copy(self):
        return DenseState(self.amplitudes.copy(), self.n)

    @property
    def norm(self):
        return float(np.linalg.norm(self.amplitudes))


def plus_state(n, cap=DEFAULT_QUBIT_CAP) -> DenseState:
    if not 1 <= n <= cap:
        raise StateError(f"qubit count {n} outside [1, {cap}]")
    amps = np.full(1 << n, 2.0 ** (-n / 2.0), dtype=np.complex128)
    return DenseState(amps, n)


def basis_state(z) -> DenseState:
    """Computational basis state for a +-1 spin vector."""
    n = len(z)
    amps = np.zeros(1 << n, dtype=np.complex128)
    amps[spins_to_index(z)] = 1.0
    return DenseState(amps, n)


def _phase_lookup(energies, gamma):
    """exp(-i*gamma*C) per basis state via a table over distinct energies."""
    lo, hi = int(energies.min()), int(energies.max())
    table = np.exp(-1j * gamma * np.arange(lo, hi + 1))
    return table[energies - lo]


def _apply_rx_all(amps, n, beta):
    """e^{-i beta X} on every qubit, in place."""
    c, s = np.cos(beta), -1j * np.sin(beta)
    for q in range(n):
        a = amps.reshape(1 << q, 2, -1)
        a0 = a[:, 0, :].copy()
        a[:, 0, :] *= c
        a[:, 0, :] += s * a[:, 1, :]
        a[:, 1, :] *= c
        a[:, 1, :] += s * a0
    return amps


def apply_qaoa(state, instance, schedule) -> DenseState:
    """Alternate diagonal cost phases and uniform X rotations, layer by layer."""
    if state.n != instance.n:
        raise StateError(f"state has {state.n} qubits, instance {instance.n}")
    amps = state.amplitudes.copy()
    energies = cost_values(instance, np.arange(1 << state.n, dtype=np.uint64))
    for gamma, beta in zip(schedule.gammas, schedule.betas):
        amps *= _phase_lookup(energies, gamma)
        _apply_rx_all(amps, state.n, beta)
    return DenseState(amps, state.n)


def energy(state, instance) -> float:
    """<H_C> = sum_z |amp(z)|^2 C(z), exactly."""
    if state.n != instance.n:
        raise StateError("dimension mismatch")
    probs = np.abs(state.amplitudes) ** 2
    energies = cost_values(instance, np.arange(1 << state.n, dtype=np.uint64))
    return float(probs @ energies)


def amplitude(state, z) -> complex:
    return complex(state.amplitudes[spins_to_index(z)])


def probabilities(state) -> np.ndarray:
    return np.abs(state.amplitudes) ** 2


def sample_exact(state, count, rng) -> np.ndarray:
    """count i.i.d. draws from |amp|^2; returns (count, n) +-1 int8 array."""
    if count < 1:
        raise StateError("sample count must be >= 1")
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(rng)
    p = probabilities(state)
    p = p / p.sum()
    ks = rng.choice(len(p), size=count, p=p)
    return np.stack([index_to_spins(int(k), state.n) for k in ks])


def apply_gates(state, gates) -> DenseState:
    """Apply a compiled gate list (1- and 2-qubit unitaries) to a dense state.

    Used as a cross-check oracle for the tensor-network evolution; gate.matrix
    index order follows gate.sites with sites[0] as the more significant bit.
    """
    amps = state.amplitudes.copy().reshape([2] * state.n)
    for gate in gates:
        sites = gate.sites
        if len(sites) == 1:
            amps = np.tensordot(gate.matrix, amps, axes=([1], [sites[0]]))
            amps = np.moveaxis(amps, 0, sites[0])
        elif len(sites) == 2:
            m = gate.matrix.reshape(2, 2, 2, 2)
            amps = np.tensordot(m, amps, axes=([2, 3], [sites[0], sites[1]]))
            amps = np.moveaxis(amps, (0, 1), (sites[0], sites[1]))
        else:
            raise StateError(f"unsupported gate arity {len(sites)}")
    return DenseState(amps.reshape(-1), state.n)


def dump(state, path):
    """Raw little-endian complex128 dump of the amplitudes, index order as in
    the basis convention above (qubit 0 = most significant bit)."""
    state.amplitudes.astype("<c16").tofile(path)
