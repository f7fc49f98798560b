"""Verification suites behind ``kmgame verify``.

Each suite yields :class:`CheckResult` records.  Combinatorial checks are
exact; numerical checks report a relative max-norm residual.  Random inputs
come from ``numpy.random.default_rng((seed, k, index))`` so every check is
reproducible and independent of which other checks ran.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from kmgame.config import RunConfig
from kmgame.core import enumerate_pairs
from kmgame.domains import verify_class_partition
from kmgame.dtree import (
    build_dtree,
    check_factorization,
    mark_couplings,
    unclogged_lower_bound,
)
from kmgame.errors import ResourceLimitError
from kmgame.golden import RAW_ENTANGLED, run_golden
from kmgame.lattice import (
    check_move_identity,
    check_wild_identity,
    direct_quadrature,
    factorized_quadrature,
    make_model,
    non_symmetric_density,
    quadrature_gamma1,
    random_mixture,
    relative_residual,
    two_term_identity,
)
from kmgame.core import make_pair
from kmgame.moves import (
    SignedTriple,
    allowable_permutations,
    classify,
    is_acceptable,
    reduce_to_tamed,
    signed_km_move,
    to_reference,
    wild_move,
)

SUITES = ("identities", "partition", "factorization", "quadrature", "golden", "all")
MAX_IDENTITY_K = 5
NON_SYMMETRIC_FLOOR = 1e-3


@dataclass
class CheckResult:
    test: str
    k: Optional[int]
    N: Optional[int]
    residual: Optional[float]
    passed: bool
    detail: str = ""

    def to_json(self) -> dict:
        return {
            "test": self.test,
            "k": self.k,
            "N": self.N,
            "residual": self.residual,
            "pass": self.passed,
            "detail": self.detail,
        }


def _rng(cfg: RunConfig, *key) -> np.random.Generator:
    return np.random.default_rng((cfg.seed,) + tuple(key))


def _random_times(rng, k):
    return tuple(float(x) for x in rng.uniform(0.0, 1.0, size=k))


# ---------------------------------------------------------------------------
# suites


def identities_suite(cfg: RunConfig) -> Iterator[CheckResult]:
    """Move identities on random symmetric densities, for ``k = 2..cfg.k``."""
    if cfg.k > MAX_IDENTITY_K:
        raise ResourceLimitError(f"identity checks at k={cfg.k} exceed the cap k <= {MAX_IDENTITY_K}")
    N = cfg.lattice_n
    model = make_model(N)
    for k in range(2, cfg.k + 1):
        pairs = enumerate_pairs(k)
        movable = [(p, j) for p in pairs for j in range(2, k + 1) if is_acceptable(p.mu, j)]
        if movable:
            worst = 0.0
            for i in range(cfg.trials):
                rng = _rng(cfg, k, 1, i)
                pair, j = movable[rng.integers(len(movable))]
                f = random_mixture(rng, N, k + 1, signed=bool(i % 2)).tensor()
                moved = signed_km_move(j, SignedTriple.from_pair(pair))
                worst = max(worst, check_move_identity(model, pair, moved, 1.0, _random_times(rng, k), f))
            yield CheckResult("km-move", k, N, worst, worst <= cfg.tol, f"{cfg.trials} trials")

        classes = [c for c in classify(k) if len(c.members) > 1]
        worst = 0.0
        for i in range(cfg.trials):
            rng = _rng(cfg, k, 2, i)
            cls = classes[rng.integers(len(classes))]
            perms = allowable_permutations(cls.reference)
            rho = perms[1 + rng.integers(len(perms) - 1)]
            f = random_mixture(rng, N, k + 1, signed=bool(i % 2)).tensor()
            moved = wild_move(rho, SignedTriple.from_pair(cls.reference))
            worst = max(worst, check_move_identity(model, cls.reference, moved, 1.0, _random_times(rng, k), f))
        yield CheckResult("wild-move", k, N, worst, worst <= cfg.tol, f"{cfg.trials} trials")

        worst = 0.0
        for i in range(cfg.trials):
            rng = _rng(cfg, k, 3, i)
            source = pairs[rng.integers(len(pairs))]
            tamed, sigma = reduce_to_tamed(*source)
            ref, rho = to_reference(tamed)
            target = SignedTriple(ref.mu, rho.inverse() * sigma, ref.sgn)
            f = random_mixture(rng, N, k + 1, signed=bool(i % 2)).tensor()
            worst = max(worst, check_move_identity(model, source, target, 1.0, _random_times(rng, k), f))
        yield CheckResult("source-to-reference", k, N, worst, worst <= cfg.tol, f"{cfg.trials} trials")

    worst = 0.0
    for i in range(cfg.trials):
        rng = _rng(cfg, 3, 4, i)
        f = random_mixture(rng, N, 3, signed=bool(i % 2)).tensor()
        t2, t3 = _random_times(rng, 2)
        worst = max(worst, check_wild_identity(model, f, t2, t3))
    yield CheckResult("wild-identity", 2, N, worst, worst <= cfg.tol, f"{cfg.trials} trials")

    least = math.inf
    for i in range(cfg.trials):
        rng = _rng(cfg, 3, 5, i)
        f = non_symmetric_density(rng, N, 3)
        t2, t3 = _random_times(rng, 2)
        least = min(least, check_wild_identity(model, f, t2, t3, require_symmetric=False))
    yield CheckResult(
        "wild-identity-non-symmetric", 2, N, least, least >= NON_SYMMETRIC_FLOOR,
        f"smallest residual over {cfg.trials} trials must be >= {NON_SYMMETRIC_FLOOR}",
    )


def partition_suite(cfg: RunConfig) -> Iterator[CheckResult]:
    """Class sources tile every reference domain, ``k = 1..cfg.k``."""
    if cfg.k > cfg.max_k:
        raise ResourceLimitError(f"k={cfg.k} exceeds the cap k <= {cfg.max_k}")
    for k in range(1, cfg.k + 1):
        classes = classify(k, max_k=cfg.max_k)
        total = sum(len(c.sources) for c in classes)
        expected = 2 ** k * math.factorial(k)
        yield CheckResult(
            "source-count", k, None, float(abs(total - expected)), total == expected,
            f"{total} sources, expected {expected}",
        )
        yield CheckResult(
            "class-count", k, None, None, len(classes) <= 8 ** k,
            f"{len(classes)} classes, bound {8 ** k}",
        )
        bad = [r for r in map(verify_class_partition, classes) if not r.ok]
        yield CheckResult(
            "sigma-sets-equal-extensions", k, None, float(len(bad)), not bad,
            f"{len(classes) - len(bad)}/{len(classes)} classes match",
        )


def factorization_suite(cfg: RunConfig) -> Iterator[CheckResult]:
    """Factorization and unclogged couplings of every reference pair."""
    if cfg.k > cfg.max_k:
        raise ResourceLimitError(f"k={cfg.k} exceeds the cap k <= {cfg.max_k}")
    for k in range(1, cfg.k + 1):
        refs = [c.reference for c in classify(k, max_k=cfg.max_k)]
        fails = [r for r in refs if not check_factorization(r)]
        yield CheckResult(
            "reference-factorizes", k, None, float(len(fails)), not fails,
            f"{len(refs) - len(fails)}/{len(refs)} reference pairs",
        )
        bound = unclogged_lower_bound(k)
        least = min(mark_couplings(build_dtree(r)).unclogged_count for r in refs)
        yield CheckResult(
            "unclogged-bound", k, None, None, least >= bound,
            f"fewest unclogged {least}, bound {bound}",
        )
    raw = make_pair(*RAW_ENTANGLED)
    yield CheckResult("raw-form-entangled", raw.k, None, None, not check_factorization(raw), str(raw))


def quadrature_suite(cfg: RunConfig) -> Iterator[CheckResult]:
    """Grid sums: raw against grouped, the two-term merge, factorized
    against direct evaluation."""
    if cfg.k > cfg.max_quadrature_k:
        raise ResourceLimitError(f"quadrature at k={cfg.k} exceeds the cap k <= {cfg.max_quadrature_k}")
    N = cfg.lattice_n
    model = make_model(N)
    k = cfg.k
    rng = _rng(cfg, k, 6)
    f = random_mixture(rng, N, k + 1, signed=True).tensor()
    classes = classify(k)
    raw = quadrature_gamma1(model, k, f, cfg.grid, "raw", classes=classes, max_k=cfg.max_quadrature_k)
    grouped = quadrature_gamma1(model, k, f, cfg.grid, "grouped", classes=classes, max_k=cfg.max_quadrature_k)
    res = relative_residual(raw, grouped)
    yield CheckResult("raw-vs-grouped", k, N, res, res <= cfg.quad_tol, f"grid={cfg.grid}")

    rng = _rng(cfg, 3, 7)
    f3 = random_mixture(rng, N, 4, signed=True).tensor()
    lhs, rhs = two_term_identity(model, f3, cfg.grid)
    res = relative_residual(lhs, rhs)
    yield CheckResult("two-term-merge", 3, N, res, res <= cfg.quad_tol, f"grid={cfg.grid}")

    worst = 0.0
    for i, cls in enumerate(classes):
        mix = random_mixture(_rng(cfg, k, 8, i), N, k + 1, signed=True)
        direct = direct_quadrature(model, cls.reference, mix.tensor(), cfg.grid)
        nested = factorized_quadrature(model, cls.reference, mix, cfg.grid)
        worst = max(worst, relative_residual(direct, nested))
    yield CheckResult(
        "factorized-vs-direct", k, N, worst, worst <= cfg.quad_tol,
        f"{len(classes)} reference pairs, grid={cfg.grid}",
    )


def golden_suite(cfg: RunConfig) -> Iterator[CheckResult]:
    for r in run_golden():
        yield CheckResult(r["test"], None, None, None, r["pass"], r["detail"])


_SUITES = {
    "identities": identities_suite,
    "partition": partition_suite,
    "factorization": factorization_suite,
    "quadrature": quadrature_suite,
    "golden": golden_suite,
}


def _suite_config(name: str, suite: str, cfg: RunConfig) -> RunConfig:
    if name == "all" and suite == "quadrature":
        return cfg.updated(k=min(cfg.k, cfg.max_quadrature_k))
    if name == "all" and suite == "identities":
        return cfg.updated(k=min(cfg.k, MAX_IDENTITY_K))
    return cfg


def _run_one(suite: str, cfg: RunConfig) -> list:
    out = []
    for check in _SUITES[suite](cfg):
        out.append({"suite": suite, **check.to_json()})
        if cfg.fail_fast and not check.passed:
            break
    return out


def run_suite(name: str, cfg: RunConfig, jobs: int = 1) -> dict:
    """Run one suite (or ``"all"``) and assemble the report.

    With ``jobs > 1`` the suites of ``"all"`` run in separate processes; the
    report is assembled in suite order afterwards, so it does not depend on
    ``jobs``.  Failures are collected unless ``cfg.fail_fast``, which stops
    at the first failing check.
    """
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    names = list(_SUITES) if name == "all" else [name]
    configs = [_suite_config(name, suite, cfg) for suite in names]
    if jobs > 1 and len(names) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(names))) as pool:
            parts = list(pool.map(_run_one, names, configs))
    else:
        parts = []
        for suite, suite_cfg in zip(names, configs):
            parts.append(_run_one(suite, suite_cfg))
            if cfg.fail_fast and parts[-1] and not parts[-1][-1]["pass"]:
                break
    checks = []
    for part in parts:
        checks.extend(part)
        if cfg.fail_fast and part and not part[-1]["pass"]:
            break
    return {
        "suite": name,
        "config": cfg.to_json(),
        "checks": checks,
        "pass": all(c["pass"] for c in checks),
    }
