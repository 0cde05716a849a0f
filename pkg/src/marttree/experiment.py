# src/marttree/experiment.py

import math
from dataclasses import dataclass, field
from ..logger import get_logger
from ..rearrange import parse_p
from ..utils.rng import Stream, stream
from .generators import GeneratorFactory
from .norms import BOOTSTRAP_RESAMPLES, CHUNK_SIZE, ENUMERATION_CAP, lp_norm_partial_sum, monte_carlo_lp

logger = get_logger("marttree.experiment")

CSV_COLUMNS = ["generator", "p", "depth", "N", "ratio", "hypothesis_ok", "seed", "base_seed",
               "pair", "exact", "norm_d", "norm_e", "se_d", "se_e", "note"]

OUTSIDE_THEOREM_RANGE = "outside theorem range"


def format_p(p):
    return "inf" if math.isinf(p) else float(p)


def pair_seed(seed, index):
    """Seed of the index-th pair of an experiment; independent of the generator and its params."""
    return int(stream(seed, Stream.EXPERIMENT, index).integers(0, 2 ** 63 - 1))


def ratio_of(norm_e, norm_d):
    if norm_d == 0.0:
        return 0.0 if norm_e == 0.0 else math.inf
    return norm_e / norm_d


@dataclass
class ExperimentReport:
    generator: str
    params: dict
    depth: int
    branching: int
    seed: int
    samples: int
    p_values: list
    rows: list = field(default_factory=list)
    checks: list = field(default_factory=list)

    @property
    def exact(self):
        return self.samples == 0

    @property
    def hypothesis_ok(self):
        return all(check["holds"] for check in self.checks)

    def failing_pairs(self):
        return [check["pair"] for check in self.checks if not check["holds"]]

    def max_ratio(self):
        """Largest observed ratio per p, keyed like the rows' p column."""
        result = {}
        for row in self.rows:
            key = str(row["p"])
            result[key] = max(result.get(key, 0.0), row["ratio"])
        return result

    def to_rows(self):
        return [{column: row[column] for column in CSV_COLUMNS} for row in self.rows]

    def to_json(self):
        return {
            "generator": self.generator,
            "params": self.params,
            "depth": self.depth,
            "N": self.branching,
            "seed": self.seed,
            "exact": self.exact,
            "samples": self.samples,
            "p_values": [format_p(p) for p in self.p_values],
            "hypothesis_ok": self.hypothesis_ok,
            "max_ratio": self.max_ratio(),
            "hypothesis_checks": self.checks,
            "rows": self.to_rows(),
        }


def _norms(d, e, p, samples, seed, cap, workers, bootstrap, chunk_size):
    if samples == 0:
        return (lp_norm_partial_sum(d, p, cap=cap, workers=workers),
                lp_norm_partial_sum(e, p, cap=cap, workers=workers), None, None)
    # common random paths for d and e
    estimate_d = monte_carlo_lp(d, p, samples, seed, bootstrap=bootstrap, chunk_size=chunk_size, workers=workers)
    estimate_e = monte_carlo_lp(e, p, samples, seed, bootstrap=bootstrap, chunk_size=chunk_size, workers=workers)
    return estimate_d.estimate, estimate_e.estimate, estimate_d.standard_error, estimate_e.standard_error


def run_ratio_experiment(generator, p_values, depth, branching, pairs, seed, samples=0, params=None,
                         tol=1e-9, cap=ENUMERATION_CAP, workers=1,
                         bootstrap=BOOTSTRAP_RESAMPLES, chunk_size=CHUNK_SIZE):
    """
    Draws `pairs` dominated pairs from the named generator and records
    ||sum e||_p / ||sum d||_p for every p, exactly (samples == 0) or by Monte Carlo.
    """
    p_values = [parse_p(p) for p in p_values]
    builder = GeneratorFactory.create_generator(generator, params)
    report = ExperimentReport(generator, dict(builder.params), int(depth), int(branching), int(seed),
                              int(samples), p_values)
    for index in range(int(pairs)):
        current_seed = pair_seed(seed, index)
        pair = builder.pair(depth, branching, current_seed)
        check = builder.hypothesis_check(pair.d, pair.e, tol)
        hypothesis_ok = check.holds
        if not hypothesis_ok:
            logger.warning("Pair %d (seed %d) fails the %s hypothesis at nodes %s",
                           index, current_seed, generator, check.failures())
        report.checks.append({
            "pair": index,
            "seed": current_seed,
            "check": check.name,
            "holds": hypothesis_ok,
            "failing_nodes": check.failures(),
            "nodes": dict(check.results),
        })
        for p in p_values:
            norm_d, norm_e, se_d, se_e = _norms(pair.d, pair.e, p, int(samples), current_seed,
                                                cap, workers, bootstrap, chunk_size)
            report.rows.append({
                "generator": generator,
                "p": format_p(p),
                "depth": int(depth),
                "N": int(branching),
                "ratio": ratio_of(norm_e, norm_d),
                "hypothesis_ok": hypothesis_ok,
                "seed": current_seed,
                "base_seed": int(seed),
                "pair": index,
                "exact": samples == 0,
                "norm_d": norm_d,
                "norm_e": norm_e,
                "se_d": se_d,
                "se_e": se_e,
                "note": OUTSIDE_THEOREM_RANGE if p == 1 else "",
            })
    logger.info("Ratio experiment %s: %d pairs, max ratio %s", generator, pairs, report.max_ratio())
    return report
