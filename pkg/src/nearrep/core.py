"""Shared types and numerical primitives for the near-representation meters.

Conventions
-----------
* A lottery is a probability vector over d+1 prizes; an act is a nonnegative
  payoff vector over d states; a dated reward is (payment, integer delay).
* Model evaluators are pure functions of frozen dataclasses: the same inputs
  always return the same bit pattern, so grid sweeps can run in any order and
  reports are reproducible byte for byte.
* Every measurement op returns a ViolationReport whose witness re-evaluates
  to the reported value (up to a recorded strictness margin); every
  construction op returns a NearRepresentation with its achieved distance and
  the theoretical bound it was checked against.
* Discount curves expose log d(t) as the primitive. d(2^40) underflows for
  any gamma < 1, so nothing exponentiates until a report needs a level value.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Sequence

import numpy as np

__all__ = [
    "NearRepError",
    "InvalidModel",
    "NoBracket",
    "BoundViolated",
    "HypothesisFailed",
    "NotConverged",
    "NotAdditive",
    "NoSuchTau",
    "ScenarioError",
    "Lottery",
    "Act",
    "DatedReward",
    "ViolationReport",
    "NearRepresentation",
    "ExpectedUtility",
    "CumulativeProspect",
    "TabulatedUtility",
    "SubjectiveExpected",
    "MaxminExpected",
    "SmoothAmbiguity",
    "CESUtility",
    "LinearPlusBounded",
    "Exponential",
    "QuasiHyperbolic",
    "Hyperbolic",
    "TabulatedDiscount",
    "LinearDelay",
    "LogDelay",
    "ContinuousTime",
    "bisect_monotone",
    "grid_sample",
    "dyadic_tail_sum",
    "mix_probs",
]

SUM_TOL = 1e-12  # probability vectors must sum to 1 within this before renormalizing


# ---------------------------------------------------------------------------
# errors

class NearRepError(Exception):
    """Base class for all package errors."""


class InvalidModel(NearRepError):
    """Model parameters violate a documented precondition."""


class NoBracket(NearRepError):
    """Bisection endpoints do not straddle a sign change."""


class BoundViolated(NearRepError):
    """A verified theorem bound failed numerically; carries the witness."""

    def __init__(self, message: str, witness: dict | None = None):
        super().__init__(message)
        self.witness = witness or {}


class HypothesisFailed(NearRepError):
    """A theorem's hypothesis does not hold on the supplied inputs."""

    def __init__(self, message: str, witness: dict | None = None):
        super().__init__(message)
        self.witness = witness or {}


class NotConverged(NearRepError):
    """An iterative limit failed its Cauchy criterion within the cap."""

    def __init__(self, message: str, iterates: Sequence[float] = ()):
        super().__init__(message)
        self.iterates = list(iterates)


class NotAdditive(NearRepError):
    """Recovered coordinate values do not sum to the value of the sure act."""

    def __init__(self, message: str, witness: dict | None = None):
        super().__init__(message)
        self.witness = witness or {}


class NoSuchTau(NearRepError):
    """No horizon with discount below the recipe threshold exists in range."""


class ScenarioError(NearRepError):
    """Scenario file is malformed or violates the schema."""


# ---------------------------------------------------------------------------
# object types

@dataclass(frozen=True)
class Lottery:
    """Probability vector over prizes indexed 0..n-1.

    Entries must be nonnegative and sum to 1 within 1e-12; the stored tuple
    is renormalized by the exact sum so downstream mixtures stay on the
    simplex.
    """

    probs: tuple[float, ...]

    def __post_init__(self):
        if len(self.probs) < 2:
            raise InvalidModel("a lottery needs at least two prizes")
        p = tuple(float(v) for v in self.probs)
        if any(v < 0.0 or not math.isfinite(v) for v in p):
            raise InvalidModel(f"negative or non-finite probability in {p}")
        total = math.fsum(p)
        if abs(total - 1.0) > SUM_TOL:
            raise InvalidModel(f"probabilities sum to {total!r}, not 1")
        if total != 1.0:
            p = tuple(v / total for v in p)
        object.__setattr__(self, "probs", p)

    @property
    def support(self) -> tuple[int, ...]:
        """Indices with strictly positive probability."""
        return tuple(i for i, v in enumerate(self.probs) if v > 0.0)

    @property
    def support_size(self) -> int:
        return len(self.support)

    @property
    def is_degenerate(self) -> bool:
        return self.support_size == 1

    @staticmethod
    def degenerate(index: int, n: int) -> "Lottery":
        return Lottery(tuple(1.0 if i == index else 0.0 for i in range(n)))

    def mix(self, other: "Lottery", lam: float) -> "Lottery":
        """Compound lottery lam * self + (1 - lam) * other."""
        if not 0.0 <= lam <= 1.0:
            raise InvalidModel(f"mixture weight {lam!r} outside [0, 1]")
        return Lottery(mix_probs(self.probs, other.probs, lam))


def mix_probs(p: Sequence[float], q: Sequence[float], lam: float) -> tuple[float, ...]:
    if len(p) != len(q):
        raise InvalidModel("mixture of lotteries over different prize sets")
    return tuple(lam * a + (1.0 - lam) * b for a, b in zip(p, q))


@dataclass(frozen=True)
class Act:
    """State-contingent payoff vector, nonnegative coordinates."""

    payoffs: tuple[float, ...]

    def __post_init__(self):
        x = tuple(float(v) for v in self.payoffs)
        if any(v < 0.0 or not math.isfinite(v) for v in x):
            raise InvalidModel(f"negative or non-finite payoff in {x}")
        object.__setattr__(self, "payoffs", x)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.payoffs, dtype=float)


@dataclass(frozen=True)
class DatedReward:
    """A payment received after an integer delay."""

    payment: float
    delay: int

    def __post_init__(self):
        if self.delay < 0 or int(self.delay) != self.delay:
            raise InvalidModel(f"delay must be a nonnegative integer, got {self.delay!r}")
        object.__setattr__(self, "delay", int(self.delay))


@dataclass(frozen=True)
class ViolationReport:
    """Measured worst-case axiom defect with a re-evaluable witness.

    value is the reported statistic (possibly including a documented
    strictness margin recorded in details['margin']); witness holds the
    arguments that attained the underlying maximum.
    """

    axiom: str
    value: float
    witness: dict[str, Any]
    samples_evaluated: int
    details: dict[str, Any] = field(default_factory=dict)

    def as_dict(self) -> dict[str, Any]:
        return {
            "axiom": self.axiom,
            "value": self.value,
            "witness": _jsonable(self.witness),
            "samples_evaluated": self.samples_evaluated,
            "details": _jsonable(self.details),
        }


@dataclass(frozen=True)
class NearRepresentation:
    """A constructed exact-form benchmark plus its certified distance.

    achieved_distance is the measured sup-norm gap to the model on the
    verification sample; bound is the theorem's guarantee it was checked
    against (achieved <= bound + the tolerance recorded in details).
    """

    kind: str
    parameters: dict[str, Any]
    achieved_distance: float
    bound: float
    details: dict[str, Any] = field(default_factory=dict)

    def as_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "parameters": _jsonable(self.parameters),
            "achieved_distance": self.achieved_distance,
            "bound": self.bound,
            "details": _jsonable(self.details),
        }


def _jsonable(obj: Any) -> Any:
    """Recursively convert numpy scalars/arrays and tuples for json.dump."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (Lottery,)):
        return list(obj.probs)
    if isinstance(obj, (Act,)):
        return list(obj.payoffs)
    return obj


# ---------------------------------------------------------------------------
# risk models: value(probs) over a fixed prize set

@dataclass(frozen=True)
class ExpectedUtility:
    """Linear model u(p) = sum_i p_i * prize_utilities[i]."""

    prize_utilities: tuple[float, ...]

    def __post_init__(self):
        u = tuple(float(v) for v in self.prize_utilities)
        if len(u) < 2:
            raise InvalidModel("need at least two prizes")
        if len(set(u)) < 2:
            raise InvalidModel("all prize utilities equal; no calibration segment")
        object.__setattr__(self, "prize_utilities", u)

    @property
    def n_outcomes(self) -> int:
        return len(self.prize_utilities)

    @property
    def best_index(self) -> int:
        return max(range(self.n_outcomes), key=lambda i: (self.prize_utilities[i], -i))

    @property
    def worst_index(self) -> int:
        return min(range(self.n_outcomes), key=lambda i: (self.prize_utilities[i], i))

    def value(self, probs: Sequence[float]) -> float:
        return math.fsum(p * u for p, u in zip(probs, self.prize_utilities))


@dataclass(frozen=True)
class CumulativeProspect:
    """Rank-dependent model with power value and inverse-S weighting.

    Prize value w(x) = x^value_exponent; probability weighting
    g(p) = p^b / (p^b + (1-p)^b)^(1/b) with b = weight_exponent. Decision
    weights are differences of g along the descending prize order.
    """

    value_exponent: float
    weight_exponent: float
    prizes: tuple[float, ...]

    def __post_init__(self):
        if not 0.0 < self.value_exponent <= 1.0:
            raise InvalidModel(f"value exponent {self.value_exponent!r} outside (0, 1]")
        # weighting is non-monotone for very small exponents; 0.28 is the
        # classical monotonicity threshold for this functional form
        if not 0.28 <= self.weight_exponent <= 1.0:
            raise InvalidModel(f"weight exponent {self.weight_exponent!r} outside [0.28, 1]")
        z = tuple(float(v) for v in self.prizes)
        if len(z) < 2:
            raise InvalidModel("need at least two prizes")
        if any(v < 0.0 for v in z):
            raise InvalidModel("prizes must be nonnegative")
        if len(set(z)) != len(z):
            raise InvalidModel("prizes must be distinct")
        object.__setattr__(self, "prizes", z)
        order = tuple(sorted(range(len(z)), key=lambda i: -z[i]))
        object.__setattr__(self, "_rank_order", order)
        object.__setattr__(self, "_prize_values", tuple(v ** self.value_exponent for v in z))

    @property
    def n_outcomes(self) -> int:
        return len(self.prizes)

    @property
    def best_index(self) -> int:
        return self._rank_order[0]

    @property
    def worst_index(self) -> int:
        return self._rank_order[-1]

    def weight(self, p: float) -> float:
        """Probability weighting g, pinned to g(0) = 0 and g(1) = 1."""
        if p <= 0.0:
            return 0.0
        if p >= 1.0:
            return 1.0
        b = self.weight_exponent
        pb = p ** b
        qb = (1.0 - p) ** b
        return pb / (pb + qb) ** (1.0 / b)

    def prize_value(self, x: float) -> float:
        return x ** self.value_exponent

    def value(self, probs: Sequence[float]) -> float:
        total = 0.0
        cum = 0.0
        g_prev = 0.0
        for i in self._rank_order:
            pi = probs[i]
            if pi == 0.0:
                continue
            cum += pi
            g_cur = self.weight(cum)
            total += (g_cur - g_prev) * self._prize_values[i]
            g_prev = g_cur
        return total


@dataclass(frozen=True, eq=False)
class TabulatedUtility:
    """Utility supplied directly as a function of the probability vector.

    Used where the utility is given rather than derived from a parametric
    family, e.g. perturbed benchmarks in converse checks. The callable must
    accept a length-n_outcomes sequence and return a float.
    """

    fn: Callable[[Sequence[float]], float]
    n_outcomes: int

    def __post_init__(self):
        if self.n_outcomes < 2:
            raise InvalidModel("need at least two prizes")
        vals = [self.fn(Lottery.degenerate(i, self.n_outcomes).probs) for i in range(self.n_outcomes)]
        if len(set(vals)) < 2:
            raise InvalidModel("constant on degenerates; no calibration segment")
        object.__setattr__(self, "_degenerate_values", tuple(vals))

    @property
    def best_index(self) -> int:
        v = self._degenerate_values
        return max(range(self.n_outcomes), key=lambda i: (v[i], -i))

    @property
    def worst_index(self) -> int:
        v = self._degenerate_values
        return min(range(self.n_outcomes), key=lambda i: (v[i], i))

    def value(self, probs: Sequence[float]) -> float:
        return float(self.fn(probs))


# ---------------------------------------------------------------------------
# uncertainty models: value(x) over acts x in R^d_+

def _validate_prior(prior: Sequence[float], what: str = "prior") -> tuple[float, ...]:
    p = tuple(float(v) for v in prior)
    if len(p) < 1:
        raise InvalidModel(f"empty {what}")
    if any(v < 0.0 for v in p):
        raise InvalidModel(f"{what} has negative entries: {p}")
    total = math.fsum(p)
    if abs(total - 1.0) > SUM_TOL:
        raise InvalidModel(f"{what} sums to {total!r}, not 1")
    if total != 1.0:
        p = tuple(v / total for v in p)
    return p


@dataclass(frozen=True)
class SubjectiveExpected:
    """Linear model u(x) = prior . x."""

    prior: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "prior", _validate_prior(self.prior))

    @property
    def n_states(self) -> int:
        return len(self.prior)

    def value(self, x: np.ndarray) -> float:
        return float(np.dot(self.prior, x))


@dataclass(frozen=True)
class MaxminExpected:
    """Worst-case expected value over a finite prior set."""

    priors: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        ps = tuple(_validate_prior(p) for p in self.priors)
        if len(ps) < 1:
            raise InvalidModel("need at least one prior")
        if len({len(p) for p in ps}) != 1:
            raise InvalidModel("priors live on different state spaces")
        object.__setattr__(self, "priors", ps)

    @property
    def n_states(self) -> int:
        return len(self.priors[0])

    @cached_property
    def _prior_matrix(self) -> np.ndarray:
        return np.asarray(self.priors, dtype=float)

    def value(self, x: np.ndarray) -> float:
        return float(np.min(self._prior_matrix @ np.asarray(x, dtype=float)))


def _f_sqrt1pz2(z: np.ndarray | float):
    return np.sqrt(1.0 + np.square(z))


def _finv_sqrt1pz2(w: float) -> float:
    return math.sqrt(max(w * w - 1.0, 0.0))


def _f_z_minus_exp(z: np.ndarray | float):
    return z - np.exp(-np.asarray(z, dtype=float))


def _finv_z_minus_exp(w: float) -> float:
    # solve c - e^{-c} = w by Newton from c0 = max(w, 0); the map is strictly
    # increasing with derivative in [1, 2], so the iteration is monotone safe
    c = max(w, 0.0)
    for _ in range(60):
        e = math.exp(-c)
        step = (c - e - w) / (1.0 + e)
        c -= step
        if abs(step) <= 1e-15 * max(1.0, abs(c)):
            break
    return c


_SMOOTH_FS: dict[str, tuple[Callable, Callable]] = {
    "sqrt1pz2": (_f_sqrt1pz2, _finv_sqrt1pz2),
    "z_minus_exp": (_f_z_minus_exp, _finv_z_minus_exp),
}


@dataclass(frozen=True)
class SmoothAmbiguity:
    """Second-order model: raw functional is a mixture of f(prior . x).

    f_name selects the strictly increasing transform; raw_value is the
    integral functional itself, value/certainty equivalents are handled by
    the uncertainty module.
    """

    f_name: str
    priors: tuple[tuple[float, ...], ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        if self.f_name not in _SMOOTH_FS:
            raise InvalidModel(f"unknown transform {self.f_name!r}; "
                               f"choose from {sorted(_SMOOTH_FS)}")
        ps = tuple(_validate_prior(p) for p in self.priors)
        if len({len(p) for p in ps}) != 1:
            raise InvalidModel("priors live on different state spaces")
        w = _validate_prior(self.weights, what="weight vector")
        if len(w) != len(ps):
            raise InvalidModel("one weight per prior required")
        object.__setattr__(self, "priors", ps)
        object.__setattr__(self, "weights", w)

    @property
    def n_states(self) -> int:
        return len(self.priors[0])

    @cached_property
    def _prior_matrix(self) -> np.ndarray:
        return np.asarray(self.priors, dtype=float)

    @cached_property
    def _weight_vector(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=float)

    @cached_property
    def mean_prior(self) -> tuple[float, ...]:
        return tuple(float(v) for v in self._weight_vector @ self._prior_matrix)

    def f(self, z):
        return _SMOOTH_FS[self.f_name][0](z)

    def f_inv(self, w: float) -> float:
        return float(_SMOOTH_FS[self.f_name][1](w))

    def raw_value(self, x: np.ndarray) -> float:
        """The integral functional sum_k weights[k] * f(priors[k] . x)."""
        z = self._prior_matrix @ np.asarray(x, dtype=float)
        return float(self._weight_vector @ self.f(z))

    def value(self, x: np.ndarray) -> float:
        return self.raw_value(x)


@dataclass(frozen=True)
class CESUtility:
    """Homogeneous-of-degree-one aggregator (sum_i w_i x_i^rho)^(1/rho)."""

    weights: tuple[float, ...]
    rho: float

    def __post_init__(self):
        w = tuple(float(v) for v in self.weights)
        if any(v <= 0.0 for v in w):
            raise InvalidModel("weights must be strictly positive")
        if not 0.0 < self.rho <= 1.0:
            raise InvalidModel(f"rho {self.rho!r} outside (0, 1]")
        object.__setattr__(self, "weights", w)

    @property
    def n_states(self) -> int:
        return len(self.weights)

    @cached_property
    def _weight_vector(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=float)

    @cached_property
    def unit_level(self) -> float:
        """Value of the all-ones act; divides out for certainty equivalents."""
        return float(np.sum(self._weight_vector)) ** (1.0 / self.rho)

    def value(self, x: np.ndarray) -> float:
        z = np.asarray(x, dtype=float) ** self.rho
        return float(self._weight_vector @ z) ** (1.0 / self.rho)


@dataclass(frozen=True)
class LinearPlusBounded:
    """Linear value plus a bounded saturating bump: prior.x + bump(1 - e^{-sum x}).

    The bump is bounded by `bump`, so scaling deviations are capped and the
    homogeneous-limit series sums geometrically.
    """

    prior: tuple[float, ...]
    bump: float

    def __post_init__(self):
        object.__setattr__(self, "prior", _validate_prior(self.prior))
        if not self.bump >= 0.0:
            raise InvalidModel("bump must be nonnegative")

    @property
    def n_states(self) -> int:
        return len(self.prior)

    def value(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        return float(np.dot(self.prior, x)) + self.bump * (1.0 - math.exp(-float(np.sum(x))))


# ---------------------------------------------------------------------------
# discrete-time discount models: log_d(t) over integer delays

@dataclass(frozen=True)
class Exponential:
    """d(t) = gamma^t."""

    gamma: float
    T_max: int | None = None

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise InvalidModel(f"gamma {self.gamma!r} outside (0, 1)")

    def log_d(self, t: int) -> float:
        _check_delay(self, t)
        return t * math.log(self.gamma)


@dataclass(frozen=True)
class QuasiHyperbolic:
    """d(0) = 1, d(t) = beta * delta^t for t >= 1."""

    beta: float
    delta: float
    T_max: int | None = None

    def __post_init__(self):
        if not 0.0 < self.beta <= 1.0:
            raise InvalidModel(f"beta {self.beta!r} outside (0, 1]")
        if not 0.0 < self.delta < 1.0:
            raise InvalidModel(f"delta {self.delta!r} outside (0, 1)")

    def log_d(self, t: int) -> float:
        _check_delay(self, t)
        if t == 0:
            return 0.0
        return math.log(self.beta) + t * math.log(self.delta)


@dataclass(frozen=True)
class Hyperbolic:
    """d(t) = 1 / (1 + k t)."""

    k: float
    T_max: int | None = None

    def __post_init__(self):
        if not self.k > 0.0:
            raise InvalidModel(f"k {self.k!r} must be positive")

    def log_d(self, t: int) -> float:
        _check_delay(self, t)
        return -math.log1p(self.k * t)


@dataclass(frozen=True)
class TabulatedDiscount:
    """Finite-horizon curve given by levels d(0), ..., d(T_max).

    Levels must be strictly positive with d(0) = 1 within 1e-12; storage is
    log space.
    """

    values: tuple[float, ...]

    def __post_init__(self):
        v = tuple(float(x) for x in self.values)
        if len(v) < 2:
            raise InvalidModel("need at least d(0) and d(1)")
        if any(x <= 0.0 for x in v):
            raise InvalidModel("discount levels must be strictly positive")
        if abs(v[0] - 1.0) > SUM_TOL:
            raise InvalidModel(f"d(0) = {v[0]!r}, must be 1")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "_log_values", tuple(math.log(x) for x in v))

    @property
    def T_max(self) -> int:
        return len(self.values) - 1

    @property
    def is_strictly_decreasing(self) -> bool:
        return all(b < a for a, b in zip(self.values, self.values[1:]))

    def log_d(self, t: int) -> float:
        _check_delay(self, t)
        return self._log_values[t]


def _check_delay(model, t: int) -> None:
    if t < 0 or int(t) != t:
        raise InvalidModel(f"delay must be a nonnegative integer, got {t!r}")
    if model.T_max is not None and t > model.T_max:
        raise InvalidModel(f"delay {t} beyond horizon T_max={model.T_max}")


def discount(model, t: int) -> float:
    """Level value d(t) = exp(log_d(t))."""
    return math.exp(model.log_d(t))


# ---------------------------------------------------------------------------
# continuous-time reward-timing models: value(x, t) on (-inf, x_bar] x [0, inf)

@dataclass(frozen=True)
class LinearDelay:
    """u(x, t) = x - rate * t; stationary benchmark with exact time shifts."""

    x_bar: float
    rate: float = 1.0

    def __post_init__(self):
        if not self.rate > 0.0:
            raise InvalidModel("rate must be positive")

    def value(self, x: float, t: float) -> float:
        _check_xt(self, x, t)
        return x - self.rate * t

    def gamma_closed_form(self, x: float) -> float:
        return (self.x_bar - x) / self.rate


@dataclass(frozen=True)
class LogDelay:
    """u(x, t) = x - log(1 + k t); delay sensitivity decays, shifts are inexact."""

    x_bar: float
    k: float

    def __post_init__(self):
        if not self.k > 0.0:
            raise InvalidModel("k must be positive")

    def value(self, x: float, t: float) -> float:
        _check_xt(self, x, t)
        return x - math.log1p(self.k * t)

    def gamma_closed_form(self, x: float) -> float:
        return (math.exp(self.x_bar - x) - 1.0) / self.k


@dataclass(frozen=True, eq=False)
class ContinuousTime:
    """Generic evaluator u(x, t) for library use and tests."""

    fn: Callable[[float, float], float]
    x_bar: float

    def value(self, x: float, t: float) -> float:
        _check_xt(self, x, t)
        return float(self.fn(x, t))


def _check_xt(model, x: float, t: float) -> None:
    if x > model.x_bar + 1e-12:
        raise InvalidModel(f"payment {x!r} above the ceiling x_bar={model.x_bar!r}")
    if t < 0.0:
        raise InvalidModel(f"delay {t!r} must be nonnegative")


# ---------------------------------------------------------------------------
# numerical primitives

def bisect_monotone(f: Callable[[float], float], lo: float, hi: float,
                    tol: float = 1e-10, max_iter: int = 200) -> float:
    """Root of a monotone f on [lo, hi] to absolute argument tolerance tol.

    Exact zeros at the endpoints or a midpoint return immediately, so
    calibration endpoints snap without rounding. Raises NoBracket when
    f(lo) and f(hi) share a sign.
    """
    if not tol > 0.0:
        raise InvalidModel(f"tol must be positive, got {tol!r}")
    if not lo < hi:
        raise InvalidModel(f"empty bracket [{lo!r}, {hi!r}]")
    flo = f(lo)
    if flo == 0.0:
        return lo
    fhi = f(hi)
    if fhi == 0.0:
        return hi
    if (flo > 0.0) == (fhi > 0.0):
        raise NoBracket(f"f({lo!r})={flo!r} and f({hi!r})={fhi!r} have the same sign")
    increasing = flo < 0.0
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:  # interval at float resolution
            break
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm < 0.0) == increasing:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _simplex_lattice(n_coords: int, subdivisions: int) -> np.ndarray:
    """All compositions of `subdivisions` into n_coords parts, divided out.

    Deterministic lexicographic order; contains every vertex, and the
    barycenter whenever subdivisions is a multiple of n_coords.
    """
    if subdivisions == 0:
        return np.full((1, n_coords), 1.0 / n_coords)
    pts = []
    for bars in itertools.combinations(range(subdivisions + n_coords - 1), n_coords - 1):
        parts = []
        prev = -1
        for b in bars:
            parts.append(b - prev - 1)
            prev = b
        parts.append(subdivisions + n_coords - 2 - prev)
        pts.append([k / subdivisions for k in parts])
    return np.asarray(pts, dtype=float)


def grid_sample(space: str, dim: int, resolution: int, bound: float = 1.0,
                seed: int = 0, max_points: int | None = None) -> np.ndarray:
    """Deterministic evaluation grid for one of the three domains.

    space 'simplex': the composition lattice of probabilities that are
    multiples of 1/resolution over `dim` coordinates (resolution 2 on three
    prizes gives the 6 half-integer points). space 'box': the product grid
    of per-axis linspace(0, bound, resolution) over `dim` axes. space
    'interval': linspace(0, bound, resolution), shape (resolution, 1).

    When max_points caps the grid, a seeded choice keeps a reproducible
    subset in original grid order. The same arguments always return the same
    array.
    """
    if space == "simplex":
        if resolution < 1:
            raise InvalidModel(f"resolution {resolution!r} must be at least 1")
        if dim < 2:
            raise InvalidModel("simplex needs at least 2 coordinates")
        pts = _simplex_lattice(dim, resolution)
    elif space == "box":
        if resolution < 2:
            raise InvalidModel(f"resolution {resolution!r} must be at least 2")
        if dim < 1:
            raise InvalidModel("box needs at least 1 axis")
        axis = np.linspace(0.0, bound, resolution)
        grids = np.meshgrid(*([axis] * dim), indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=-1)
    elif space == "interval":
        if resolution < 2:
            raise InvalidModel(f"resolution {resolution!r} must be at least 2")
        pts = np.linspace(0.0, bound, resolution).reshape(-1, 1)
    else:
        raise InvalidModel(f"unknown space {space!r}")
    if max_points is not None and len(pts) > max_points:
        rng = np.random.default_rng(seed)
        idx = np.sort(rng.choice(len(pts), size=max_points, replace=False))
        pts = pts[idx]
    return pts


def dyadic_tail_sum(term: Callable[[int], float], n_max: int,
                    ratio_tol: float = 0.75, window: int = 4,
                    floor: float = 1e-15) -> tuple[float, bool]:
    """Partial sum of nonnegative terms with a geometric-decay verdict.

    Sums term(0..n_max) with fsum and classifies the series convergent when
    each of the last `window` consecutive ratios is at most ratio_tol (terms
    at or below `floor` count as converged; a term rising back above the
    floor after one below it does not).
    """
    if n_max < 0:
        raise InvalidModel("n_max must be nonnegative")
    terms = []
    for i in range(n_max + 1):
        v = float(term(i))
        if v < 0.0 or not math.isfinite(v):
            raise InvalidModel(f"term({i}) = {v!r}; terms must be nonnegative and finite")
        terms.append(v)
    total = math.fsum(terms)
    tail = terms[-(window + 1):]
    converged = True
    for a, b in zip(tail, tail[1:]):
        if b <= floor:
            continue
        if a <= floor or b > ratio_tol * a:
            converged = False
            break
    return total, converged
