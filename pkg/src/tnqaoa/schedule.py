"""Parameter schedules: Chebyshev interpolation, median transfer, training.

A depth-p schedule is the pair of angle lists (gamma_1..gamma_p,
beta_1..beta_p).  For deep circuits the angles are generated from a small
number of coefficients through shifted Chebyshev polynomials evaluated at the
schedule fraction x = j/p:

    gamma_j = sum_c u_c T_{c-1}(2 j/p - 1),   beta_j likewise with v_c.

Training minimizes the cost expectation reported by a simulator backend over
(u, v) with a bound-constrained derivative-free optimizer, independently per
instance; transfer to new instances takes the per-layer median of the trained
schedules.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev
from scipy.optimize import Bounds, minimize

TWO_PI = 2.0 * np.pi

# Fixed reference schedule from a depth-5 global parameter search; useful as a
# baseline circuit and as the default initialization for training.
_BASELINE_GAMMAS = (6.16555, 6.08373, 6.01445, 5.9616, 5.93736)
_BASELINE_BETAS = (0.53822, 0.44776, 0.32923, 0.23056, 0.12587)


class ScheduleError(ValueError):
    pass


@dataclass(frozen=True)
class Schedule:
    gammas: tuple
    betas: tuple

    def __post_init__(self):
        g = tuple(float(x) for x in self.gammas)
        b = tuple(float(x) for x in self.betas)
        if len(g) != len(b):
            raise ScheduleError("gamma and beta lists must have equal length")
        if not all(np.isfinite(g + b)):
            raise ScheduleError("schedule angles must be finite")
        object.__setattr__(self, "gammas", g)
        object.__setattr__(self, "betas", b)

    @property
    def p(self):
        return len(self.gammas)

    def to_json_dict(self):
        return {"p": self.p, "gammas": list(self.gammas), "betas": list(self.betas)}

    @classmethod
    def from_json_dict(cls, doc):
        return cls(gammas=tuple(doc["gammas"]), betas=tuple(doc["betas"]))


@dataclass(frozen=True)
class InterpCoeffs:
    u: tuple
    v: tuple

    def __post_init__(self):
        u = tuple(float(x) for x in self.u)
        v = tuple(float(x) for x in self.v)
        if len(u) != len(v) or not u:
            raise ScheduleError("u and v must be non-empty and of equal length")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @property
    def num_basis(self):
        return len(self.u)

    def to_json_dict(self):
        return {"C": self.num_basis, "u": list(self.u), "v": list(self.v)}

    @classmethod
    def from_json_dict(cls, doc):
        return cls(u=tuple(doc["u"]), v=tuple(doc["v"]))


def baseline_p5() -> Schedule:
    """The fixed depth-5 reference schedule."""
    return Schedule(gammas=_BASELINE_GAMMAS, betas=_BASELINE_BETAS)


def basis_value(c, x) -> float:
    """c-th basis function (1-based): shifted Chebyshev T_{c-1} on [0, 1].

    Raw (unnormalized) Chebyshev values are used; any per-basis rescaling is
    absorbed by the coefficients during optimization.
    """
    if c < 1:
        raise ScheduleError(f"basis index must be >= 1, got {c}")
    if not 0.0 <= x <= 1.0:
        raise ScheduleError(f"basis argument must lie in [0, 1], got {x}")
    coef = np.zeros(c)
    coef[c - 1] = 1.0
    return float(chebyshev.chebval(2.0 * x - 1.0, coef))


def _design_matrix(p, num_basis):
    xs = np.arange(1, p + 1) / p
    cols = [chebyshev.chebval(2.0 * xs - 1.0, np.eye(num_basis)[c]) for c in range(num_basis)]
    return np.column_stack(cols) if cols else np.zeros((p, 0))


def schedule_from_coeffs(coeffs, p) -> Schedule:
    """Evaluate the interpolation at x = j/p for j = 1..p."""
    if p < 1:
        raise ScheduleError("schedule depth must be >= 1")
    F = _design_matrix(p, coeffs.num_basis)
    return Schedule(gammas=tuple(F @ np.asarray(coeffs.u)),
                    betas=tuple(F @ np.asarray(coeffs.v)))


def fit_coeffs(sched, num_basis) -> InterpCoeffs:
    """Least-squares Chebyshev fit of an existing schedule (minimum-norm when
    the basis is larger than the depth).  Used to seed training and to extend
    the baseline schedule to other depths."""
    F = _design_matrix(sched.p, num_basis)
    u, *_ = np.linalg.lstsq(F, np.asarray(sched.gammas), rcond=None)
    v, *_ = np.linalg.lstsq(F, np.asarray(sched.betas), rcond=None)
    return InterpCoeffs(u=tuple(u), v=tuple(v))


def extend_baseline(p, num_basis=5) -> Schedule:
    """Baseline schedule re-interpolated to depth p through the Chebyshev fit."""
    return schedule_from_coeffs(fit_coeffs(baseline_p5(), num_basis), p)


def median_transfer(schedules) -> Schedule:
    """Per-layer componentwise median of k same-depth schedules.

    Acts on raw angle values (no 2-pi wrapping); an even k takes the midpoint
    of the two central order statistics.
    """
    if not schedules:
        raise ScheduleError("median transfer needs at least one schedule")
    p = schedules[0].p
    if any(s.p != p for s in schedules):
        raise ScheduleError("median transfer needs schedules of equal depth")
    g = np.median([s.gammas for s in schedules], axis=0)
    b = np.median([s.betas for s in schedules], axis=0)
    return Schedule(gammas=tuple(g), betas=tuple(b))


# ---------------------------------------------------------------------------
# Derivative-free bound-constrained minimization
# ---------------------------------------------------------------------------

class _BudgetExhausted(Exception):
    pass


@dataclass
class DfoResult:
    x: np.ndarray
    fun: float
    evaluations: int
    history: list  # (evaluation index, best objective so far)


def minimize_dfo(fun, x0, bound=TWO_PI, budget=300, method="powell",
                 initial_step=0.3) -> DfoResult:
    """Minimize fun over the box |x_i| <= bound with at most `budget` calls.

    Powell's direction-set search (default) or Nelder-Mead, restarted from the
    incumbent while budget remains and progress is being made.  The best
    evaluated point is tracked outside the solver, so the returned objective
    is non-increasing in the number of evaluations by construction.
    """
    x0 = np.asarray(x0, dtype=float)
    best = {"x": x0.copy(), "f": np.inf, "n": 0}
    history = []

    def wrapped(x):
        if best["n"] >= budget:
            raise _BudgetExhausted
        f = float(fun(np.asarray(x, dtype=float)))
        best["n"] += 1
        if f < best["f"]:
            best["f"] = f
            best["x"] = np.array(x, dtype=float)
        history.append((best["n"], best["f"]))
        return f

    if budget <= 0:
        return DfoResult(x=x0, fun=np.nan, evaluations=0, history=[])

    lo, hi = np.full_like(x0, -bound), np.full_like(x0, bound)
    n = len(x0)
    while best["n"] < budget:
        f_before = best["f"]
        start = np.clip(best["x"] if np.isfinite(best["f"]) else x0, lo, hi)
        try:
            if method == "powell":
                minimize(wrapped, start, method="Powell", bounds=Bounds(lo, hi),
                         options={"direc": initial_step * np.eye(n),
                                  "maxfev": budget - best["n"], "xtol": 1e-8, "ftol": 1e-10})
            elif method == "nelder-mead":
                simplex = np.vstack([start] + [start + initial_step * e for e in np.eye(n)])
                minimize(wrapped, start, method="Nelder-Mead", bounds=Bounds(lo, hi),
                         options={"initial_simplex": simplex,
                                  "maxfev": budget - best["n"], "fatol": 1e-12, "xatol": 1e-10})
            else:
                raise ScheduleError(f"unknown optimizer method {method!r}")
        except _BudgetExhausted:
            break
        if not (best["f"] < f_before - 1e-14):
            break  # converged: a restart from the same point cannot improve
    return DfoResult(x=best["x"], fun=best["f"], evaluations=best["n"], history=history)


# ---------------------------------------------------------------------------
# Per-instance training
# ---------------------------------------------------------------------------

class TrainError(RuntimeError):
    def __init__(self, index, message):
        super().__init__(f"instance {index}: {message}")
        self.index = index


@dataclass
class TrainResult:
    coeffs: InterpCoeffs
    schedule: Schedule
    energy: float
    evaluations: int
    history: list


@dataclass
class TrainConfig:
    budget: int = 300
    bound: float = TWO_PI
    method: str = "powell"
    initial_step: float = 0.3
    init: InterpCoeffs | None = None   # default: Chebyshev fit of the baseline
    imag_warn: float = 1e-8


def _default_init(num_basis):
    return fit_coeffs(baseline_p5(), num_basis)


def train(instances, p, num_basis, backend, config=None):
    """Optimize interpolation coefficients independently for each instance.

    backend must expose energy(instance, schedule) -> float (a complex return
    is accepted: its real part is used and a large imaginary residue warns).
    Returns one TrainResult per instance, in order.
    """
    config = config or TrainConfig()
    init = config.init or _default_init(num_basis)
    if init.num_basis != num_basis:
        raise ScheduleError("initial coefficients have the wrong basis size")
    x0 = np.concatenate([init.u, init.v])
    results = []
    for idx, inst in enumerate(instances):
        def objective(x, inst=inst, idx=idx):
            coeffs = InterpCoeffs(u=tuple(x[:num_basis]), v=tuple(x[num_basis:]))
            sched = schedule_from_coeffs(coeffs, p)
            try:
                e = backend.energy(inst, sched)
            except Exception as exc:  # re-raise with the failing instance attached
                raise TrainError(idx, str(exc)) from exc
            if np.iscomplexobj(e) or isinstance(e, complex):
                if abs(np.imag(e)) > config.imag_warn:
                    warnings.warn(
                        f"instance {idx}: imaginary energy residue {np.imag(e):.3e}")
                e = np.real(e)
            return float(e)

        if config.budget <= 0:
            results.append(TrainResult(coeffs=init,
                                       schedule=schedule_from_coeffs(init, p),
                                       energy=np.nan, evaluations=0, history=[]))
            continue
        res = minimize_dfo(objective, x0, bound=config.bound, budget=config.budget,
                           method=config.method, initial_step=config.initial_step)
        coeffs = InterpCoeffs(u=tuple(res.x[:num_basis]), v=tuple(res.x[num_basis:]))
        results.append(TrainResult(coeffs=coeffs,
                                   schedule=schedule_from_coeffs(coeffs, p),
                                   energy=res.fun, evaluations=res.evaluations,
                                   history=res.history))
    return results


def write_training_log(path, seeds, results):
    """CSV log: one row per recorded evaluation, (instance_seed, iteration,
    best_energy, evaluations)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["instance_seed", "iteration", "best_energy", "evaluations"])
        for seed, res in zip(seeds, results):
            for it, (k, f) in enumerate(res.history):
                writer.writerow([seed, it, repr(f), k])
