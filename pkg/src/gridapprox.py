# src/gridapprox.py

import math
from dataclasses import dataclass
from fractions import Fraction
import numpy as np
from .errors import DomainError, FormatError
from .logger import get_logger
from .rearrange import StepFunction, lp_norm, parse_p, weakly_majorizes

logger = get_logger("gridapprox")

DEFAULT_TOLERANCE = 1e-9
GAMMA_FRACTION = 0.9
MAX_GRID = 2 ** 63 - 1


def parse_rational(value):
    """[num, den], "num/den" or an integer -> Fraction. Floats are rejected."""
    try:
        if isinstance(value, (list, tuple)):
            if len(value) != 2:
                raise FormatError(f"A rational must be [numerator, denominator], got {value}")
            num, den = value
            if not isinstance(num, int) or not isinstance(den, int) or isinstance(num, bool):
                raise FormatError(f"Numerator and denominator must be integers, got {value}")
            return Fraction(num, den)
        if isinstance(value, Fraction):
            return value
        if isinstance(value, int) and not isinstance(value, bool):
            return Fraction(value)
        if isinstance(value, str):
            return Fraction(value.strip())
    except ZeroDivisionError:
        raise FormatError(f"Rational {value} has a zero denominator")
    except ValueError as e:
        raise FormatError(f"Invalid rational {value!r}: {e}")
    raise FormatError(f"Breakpoints must be rationals given as [num, den] or 'num/den', got {value!r}")


@dataclass(frozen=True)
class RationalStepFunction:
    """
    Step function on [0,1] given by disjoint pieces [start, stop) with rational
    ends. Points covered by no piece have value 0.
    """
    pieces: tuple

    def __post_init__(self):
        pieces = []
        for start, stop, value in self.pieces:
            start, stop = parse_rational(start), parse_rational(stop)
            value = float(value)
            if not (0 <= start < stop <= 1):
                raise FormatError(f"Piece [{start}, {stop}) must satisfy 0 <= start < stop <= 1")
            if not math.isfinite(value):
                raise FormatError("Piece values must be finite")
            pieces.append((start, stop, value))
        pieces.sort(key=lambda piece: piece[0])
        for (_, stop, _), (start, _, _) in zip(pieces, pieces[1:]):
            if start < stop:
                raise FormatError(f"Pieces overlap at {start}")
        object.__setattr__(self, "pieces", tuple(pieces))

    def breakpoints(self):
        points = {Fraction(0), Fraction(1)}
        for start, stop, _ in self.pieces:
            points.update((start, stop))
        return sorted(points)

    @classmethod
    def from_step_function(cls, f):
        n = f.n
        return cls(tuple((Fraction(i, n), Fraction(i + 1, n), float(v)) for i, v in enumerate(f.values)))

    @classmethod
    def from_json(cls, payload):
        if isinstance(payload, dict) and "values" in payload:
            return cls.from_step_function(StepFunction.from_json(payload))
        if not isinstance(payload, dict) or "pieces" not in payload:
            raise FormatError("Step function JSON must have a 'pieces' or a 'values' list")
        try:
            return cls(tuple((piece["from"], piece["to"], piece["value"]) for piece in payload["pieces"]))
        except (KeyError, TypeError):
            raise FormatError("Every piece needs 'from', 'to' and 'value'")

    def to_json(self):
        return {"pieces": [
            {"from": [start.numerator, start.denominator], "to": [stop.numerator, stop.denominator], "value": value}
            for start, stop, value in self.pieces
        ]}


def as_rational_step_function(f):
    if isinstance(f, RationalStepFunction):
        return f
    if isinstance(f, StepFunction):
        return RationalStepFunction.from_step_function(f)
    if isinstance(f, dict):
        return RationalStepFunction.from_json(f)
    return RationalStepFunction.from_step_function(StepFunction(f))


def common_grid(breakpoints):
    """Least common denominator of the breakpoints."""
    grid = 1
    for point in breakpoints:
        grid = math.lcm(grid, parse_rational(point).denominator)
        if grid > MAX_GRID:
            raise FormatError(f"Common denominator exceeds 64 bits ({grid})")
    return grid


def _project_exact(f, n):
    """Cell values on the grid of n cells as Fractions of the stored floats."""
    values = [Fraction(0)] * n
    for start, stop, value in f.pieces:
        first, last = start * n, stop * n
        if first.denominator != 1 or last.denominator != 1:
            raise DomainError(f"Grid of {n} cells is not aligned with breakpoint {start if first.denominator != 1 else stop}")
        for i in range(int(first), int(last)):
            values[i] = Fraction(value)
    return values


def project(f, n):
    """Cell averages of f on the uniform grid of n cells; n must refine every breakpoint."""
    f = as_rational_step_function(f)
    n = int(n)
    if n < 1:
        raise DomainError(f"Grid size must be positive, got {n}")
    return StepFunction(np.array([float(v) for v in _project_exact(f, n)]))


def _mean(values):
    return sum(values, Fraction(0)) / len(values)


@dataclass(frozen=True)
class ApproximationResult:
    d_prime: StepFunction
    e_prime: StepFunction
    n: int
    gamma: float
    d_error: float
    e_error: float
    d_exact: tuple
    e_exact: tuple

    @property
    def d_mean(self):
        return _mean(self.d_exact)

    @property
    def e_mean(self):
        return _mean(self.e_exact)

    def to_json(self):
        return {
            "N": self.n,
            "gamma": self.gamma,
            "d_prime": self.d_prime.to_json(),
            "e_prime": self.e_prime.to_json(),
            "d_error": self.d_error,
            "e_error": self.e_error,
            "d_mean": str(self.d_mean),
            "e_mean": str(self.e_mean),
        }


def choose_gamma(eps, norm, fraction=GAMMA_FRACTION):
    """fraction * min(eps / (7 max norm), 1/3): strictly inside the admissible range."""
    bound = 1.0 / 3.0 if norm == 0 else min(eps / (7.0 * norm), 1.0 / 3.0)
    return fraction * bound


def approximate_pair(d, e, eps, p=2.0, n=None, tol=DEFAULT_TOLERANCE, gamma_fraction=GAMMA_FRACTION):
    """
    Grid approximation of a mean-zero pair with e's rearrangement integrals
    below d's: returns d', e' on one uniform grid with exactly zero means,
    within eps of d and e in L_p and with the same domination for every t.

    d' = (1 + 3 gamma)(alpha - zeta), e' = (1 - 3 gamma)(beta - eta), where alpha
    and beta are the exact cell averages of d and e on the grid and zeta, eta
    their means.
    """
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps}")
    p = parse_p(p)
    d, e = as_rational_step_function(d), as_rational_step_function(e)
    grid = common_grid(d.breakpoints() + e.breakpoints())
    if n is None:
        n = grid
    elif int(n) % grid != 0:
        raise DomainError(f"N={n} is not a multiple of the common grid {grid}")
    n = int(n)

    alpha, beta = _project_exact(d, n), _project_exact(e, n)
    d_grid, e_grid = StepFunction([float(v) for v in alpha]), StepFunction([float(v) for v in beta])
    if abs(float(_mean(alpha))) > tol:
        raise DomainError(f"d must have mean zero, got {float(_mean(alpha)):.6g}")
    if abs(float(_mean(beta))) > tol:
        raise DomainError(f"e must have mean zero, got {float(_mean(beta)):.6g}")
    if not weakly_majorizes(d_grid, e_grid, tol):
        raise DomainError("The rearrangement integrals of e must not exceed those of d")

    gamma = Fraction(choose_gamma(eps, max(lp_norm(d_grid, p), lp_norm(e_grid, p)), gamma_fraction))
    zeta, eta = _mean(alpha), _mean(beta)
    d_exact = tuple((1 + 3 * gamma) * (a - zeta) for a in alpha)
    e_exact = tuple((1 - 3 * gamma) * (b - eta) for b in beta)

    d_prime = StepFunction([float(v) for v in d_exact])
    e_prime = StepFunction([float(v) for v in e_exact])
    result = ApproximationResult(
        d_prime=d_prime,
        e_prime=e_prime,
        n=n,
        gamma=float(gamma),
        d_error=lp_norm(StepFunction(d_grid.values - d_prime.values), p),
        e_error=lp_norm(StepFunction(e_grid.values - e_prime.values), p),
        d_exact=d_exact,
        e_exact=e_exact,
    )
    logger.info("Grid approximation on N=%d with gamma=%.6g (errors %.3g / %.3g)",
                n, result.gamma, result.d_error, result.e_error)
    return result

