from fractions import Fraction
import numpy as np

from src.gridapprox import RationalStepFunction


def k_functional_oracle(values, t):
    """Integral of the decreasing rearrangement over [0, t], computed cell by cell."""
    ordered = np.sort(np.abs(np.asarray(values, dtype=float)))[::-1]
    n = ordered.size
    t = np.atleast_1d(np.asarray(t, dtype=float))
    widths = np.clip(t[:, None] - np.arange(n)[None, :] / n, 0.0, 1.0 / n)
    return widths @ ordered


def dense_t_sweep_majorizes(f, g, resolution=1e-3, tol=1e-9):
    steps = int(round(1.0 / resolution))
    t = np.arange(steps + 1) / steps
    return bool(np.all(k_functional_oracle(g, t) <= k_functional_oracle(f, t) + tol))


def dense_lambda_sweep_holds(f, g, resolution=1e-3, tol=1e-9):
    f_abs, g_abs = np.abs(np.asarray(f, dtype=float)), np.abs(np.asarray(g, dtype=float))
    top = int(np.ceil(max(f_abs.max(), g_abs.max()))) + 1
    steps = int(round(top / resolution))
    lams = np.arange(steps + 1) * (top / steps)
    lhs = np.maximum(lams[:, None], g_abs[None, :]).mean(axis=1)
    rhs = np.maximum(lams[:, None], f_abs[None, :]).mean(axis=1)
    return bool(np.all(lhs <= rhs + tol))


def random_permutation_matrix(rng, n):
    return np.eye(n)[rng.permutation(n)]


def random_doubly_stochastic(rng, n, max_terms=20):
    terms = int(rng.integers(1, max_terms + 1))
    weights = rng.random(terms) + 0.05
    weights /= weights.sum()
    return sum(w * random_permutation_matrix(rng, n) for w in weights)


def random_sub_doubly_stochastic(rng, n):
    return random_doubly_stochastic(rng, n) * rng.random((n, n))


def random_zero_sum_contraction(rng, n, terms=3):
    """sum theta_i eps_i P_i with positive and negative halves of equal mass <= 1/2."""
    mass = rng.uniform(0.2, 1.0)
    plus = rng.random(terms) + 0.05
    minus = rng.random(terms) + 0.05
    plus *= 0.5 * mass / plus.sum()
    minus *= 0.5 * mass / minus.sum()
    matrix = np.zeros((n, n))
    for w in plus:
        matrix += w * random_permutation_matrix(rng, n)
    for w in minus:
        matrix -= w * random_permutation_matrix(rng, n)
    return matrix


def random_contraction(rng, n):
    """Random signs on a sub-doubly stochastic matrix: row and column absolute sums <= 1."""
    return random_sub_doubly_stochastic(rng, n) * rng.choice([-1.0, 1.0], size=(n, n))


def random_integer_vector(rng, n, low=-3, high=3):
    return rng.integers(low, high + 1, size=n).astype(float)


def _random_breakpoints(rng, denominators=(2, 3, 4, 5, 6)):
    points = {Fraction(0), Fraction(1)}
    for _ in range(int(rng.integers(1, 4))):
        den = int(rng.choice(denominators))
        points.add(Fraction(int(rng.integers(1, den)), den))
    return sorted(points)


def random_zero_mean_pieces(rng):
    points = _random_breakpoints(rng)
    values = [float(v) for v in rng.normal(size=len(points) - 1)]
    widths = [float(b - a) for a, b in zip(points, points[1:])]
    values[-1] = -sum(v * w for v, w in zip(values[:-1], widths[:-1])) / widths[-1]
    return RationalStepFunction(tuple((a, b, v) for a, b, v, in zip(points, points[1:], values)))


def grid_values(f, n):
    values = np.zeros(n)
    for start, stop, value in f.pieces:
        values[int(start * n):int(stop * n)] = value
    return values


def random_rational_pair(rng):
    """Zero-mean rational step functions (d, e) with e's rearrangement integrals below d's."""
    d = random_zero_mean_pieces(rng)
    e = random_zero_mean_pieces(rng)
    dens = [p.denominator for p in d.breakpoints() + e.breakpoints()]
    n = int(np.lcm.reduce(dens))
    t = np.arange(1, n + 1) / n
    ratio = np.min(k_functional_oracle(grid_values(d, n), t) / k_functional_oracle(grid_values(e, n), t))
    c = 0.999 * ratio
    return d, RationalStepFunction(tuple((a, b, c * v) for a, b, v in e.pieces))
