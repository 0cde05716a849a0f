# src/rearrange.py

import math
from dataclasses import dataclass
import numpy as np
from .errors import DomainError, FormatError
from .logger import get_logger

logger = get_logger("rearrange")

DEFAULT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class StepFunction:
    """
    A function on [0,1] that is constant on each cell [(i-1)/N, i/N) of a
    uniform grid. values[i] is the value on the (i+1)-th cell.
    """
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float).reshape(-1)
        if values.size < 1:
            raise FormatError("A step function needs at least one cell")
        if not np.all(np.isfinite(values)):
            raise FormatError("Step function values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n(self):
        return self.values.size

    def integral(self):
        return float(self.values.sum() / self.n)

    def resample(self, n):
        """Same function on a grid of n cells; n must be a multiple of N."""
        if n % self.n != 0:
            raise DomainError(f"Cannot resample a grid of {self.n} cells to {n} cells by replication")
        return StepFunction(np.repeat(self.values, n // self.n))

    def scale(self, factor):
        return StepFunction(self.values * factor)

    def to_json(self):
        return {"n": self.n, "values": [float(v) for v in self.values]}

    @classmethod
    def from_json(cls, payload):
        if not isinstance(payload, dict) or "values" not in payload:
            raise FormatError("Step function JSON must be an object with a 'values' list")
        function = cls(payload["values"])
        if "n" in payload and int(payload["n"]) != function.n:
            raise FormatError(f"Step function declares n={payload['n']} but has {function.n} values")
        return function


def as_step_function(f):
    return f if isinstance(f, StepFunction) else StepFunction(f)


def align(f, g):
    """Resamples both functions to the least common multiple of their grids."""
    f, g = as_step_function(f), as_step_function(g)
    if f.n == g.n:
        return f, g
    n = math.lcm(f.n, g.n)
    return f.resample(n), g.resample(n)


def _sorted_magnitudes(values):
    # stable sort on -|v| breaks ties by original index
    magnitudes = np.abs(values)
    order = np.argsort(-magnitudes, kind="stable")
    return magnitudes[order]


def decreasing_rearrangement(f):
    f = as_step_function(f)
    return StepFunction(_sorted_magnitudes(f.values))


def rearrangement_order(values):
    """Index order that sorts |values| non-increasingly, ties by original index."""
    return np.argsort(-np.abs(np.asarray(values, dtype=float)), kind="stable")


def k_functional_breakpoints(f):
    """Values of t -> integral of f# over [0,t] at t = j/N, j = 0..N."""
    f = as_step_function(f)
    partial = np.cumsum(_sorted_magnitudes(f.values)) / f.n
    return np.concatenate(([0.0], partial))


def row_k_functionals(rows):
    """Breakpoint K-functionals for each row of a 2-D array (one node per row)."""
    rows = np.abs(np.asarray(rows, dtype=float))
    n = rows.shape[-1]
    ordered = -np.sort(-rows, axis=-1)
    partial = np.cumsum(ordered, axis=-1) / n
    zeros = np.zeros(rows.shape[:-1] + (1,))
    return np.concatenate((zeros, partial), axis=-1)


def k_functional(f, t):
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"t must lie in [0,1], got {t}")
    f = as_step_function(f)
    ordered = _sorted_magnitudes(f.values)
    n = f.n
    j = min(int(math.floor(t * n)), n)
    head = ordered[:j].sum() / n
    if j == n:
        return float(head)
    return float(head + (t - j / n) * ordered[j])


def peetre_k_functional(f, t):
    """
    inf over f = f0 + f1 of ||f0||_1 + t ||f1||_inf. The infimum is attained by
    truncating f at a level s taken among 0 and the cell magnitudes.
    """
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"t must lie in [0,1], got {t}")
    magnitudes = np.abs(as_step_function(f).values)
    levels = np.concatenate(([0.0], magnitudes))
    excess = np.maximum(magnitudes[None, :] - levels[:, None], 0.0).mean(axis=1)
    return float(np.min(excess + t * levels))


def weakly_majorizes(f, g, tol=DEFAULT_TOLERANCE):
    """True when the integral of g# over [0,t] never exceeds that of f#, for t in [0,1]."""
    f, g = align(f, g)
    return bool(np.all(k_functional_breakpoints(g) <= k_functional_breakpoints(f) + tol))


def majorization_margin(f, g):
    """Largest excess of K(g,t) over K(f,t) across the breakpoints (0 when none)."""
    f, g = align(f, g)
    return float(max(0.0, np.max(k_functional_breakpoints(g) - k_functional_breakpoints(f))))


def lambda_max_expectation(f, lam):
    if lam < 0:
        raise DomainError(f"lambda must be nonnegative, got {lam}")
    return float(np.maximum(lam, np.abs(as_step_function(f).values)).mean())


def tail_integral(f, lam):
    """Integral over (lam, inf) of P(|f| > s) ds, i.e. E[(|f| - lam)^+]."""
    if lam < 0:
        raise DomainError(f"lambda must be nonnegative, got {lam}")
    return float(np.maximum(np.abs(as_step_function(f).values) - lam, 0.0).mean())


@dataclass(frozen=True)
class EquivalenceReport:
    lambda_condition: bool
    majorization_condition: bool
    lambda_margin: float
    majorization_margin: float

    @property
    def margin(self):
        return max(self.lambda_margin, self.majorization_margin)

    @property
    def consistent(self):
        return self.lambda_condition == self.majorization_condition

    def to_json(self):
        return {
            "lambda_condition": self.lambda_condition,
            "majorization_condition": self.majorization_condition,
            "lambda_margin": self.lambda_margin,
            "majorization_margin": self.majorization_margin,
            "margin": self.margin,
            "consistent": self.consistent,
        }


def lambda_test_points(f, g):
    f, g = as_step_function(f), as_step_function(g)
    points = np.concatenate(([0.0], np.abs(f.values), np.abs(g.values)))
    return np.unique(points)


def check_lambda_equivalence(f, g, tol=DEFAULT_TOLERANCE):
    """
    Evaluates both sides of the equivalence between the lambda-max condition
    E[lam v |g|] <= E[lam v |f|] for all lam >= 0 and weak majorization of g by f.
    Both sides of the lambda condition are piecewise linear in lam with breakpoints
    at the cell magnitudes, so testing 0 and those magnitudes is exact.
    """
    f, g = as_step_function(f), as_step_function(g)
    lams = lambda_test_points(f, g)
    lhs = np.maximum(lams[:, None], np.abs(g.values)[None, :]).mean(axis=1)
    rhs = np.maximum(lams[:, None], np.abs(f.values)[None, :]).mean(axis=1)
    lambda_margin = float(max(0.0, np.max(lhs - rhs)))
    report = EquivalenceReport(
        lambda_condition=bool(np.all(lhs <= rhs + tol)),
        majorization_condition=weakly_majorizes(f, g, tol),
        lambda_margin=lambda_margin,
        majorization_margin=majorization_margin(f, g),
    )
    if not report.consistent:
        logger.warning("lambda condition and majorization disagree (margins %.3g / %.3g)",
                       report.lambda_margin, report.majorization_margin)
    return report


def parse_p(p):
    if isinstance(p, str):
        if p.strip().lower() in ("inf", "infinity", "oo"):
            return math.inf
        p = float(p)
    p = float(p)
    if math.isnan(p) or p < 1:
        raise DomainError(f"p must satisfy p >= 1 (or be infinity), got {p}")
    return p


def lp_norm(f, p):
    p = parse_p(p)
    magnitudes = np.abs(as_step_function(f).values)
    if math.isinf(p):
        return float(magnitudes.max())
    return float(np.mean(magnitudes ** p) ** (1.0 / p))


def czr_contraction_gap(f, g, p):
    """||f - g||_p - ||f# - g#||_p; never below floating-point noise."""
    p = parse_p(p)
    f, g = align(f, g)
    difference = StepFunction(f.values - g.values)
    rearranged = StepFunction(_sorted_magnitudes(f.values) - _sorted_magnitudes(g.values))
    return lp_norm(difference, p) - lp_norm(rearranged, p)


def conditional_expectation(f, m):
    """Cell averages of f over the coarser uniform grid of m cells (m divides N)."""
    f = as_step_function(f)
    if m < 1 or f.n % m != 0:
        raise DomainError(f"A grid of {m} cells is not a coarsening of {f.n} cells")
    return StepFunction(f.values.reshape(m, f.n // m).mean(axis=1))
