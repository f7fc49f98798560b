"""Time-integration domains as forest posets on ``t_1, ..., t_{k+1}``.

A domain is stored by its cover relations ``(parent, child)``, each meaning
``t_child <= t_parent``.  Every label ``2..k+1`` has exactly one parent and
all chains end at ``t_1``, which is the fixed outer time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

from kmgame import _backend
from kmgame.core import CollapseMap, Pair, TimePermutation, left_branches, mu_to_tree
from kmgame.errors import DomainError, NotReference


@dataclass(frozen=True)
class DomainPoset:
    """Forest order on time labels ``1..k+1`` rooted at 1."""

    k: int
    covers: frozenset

    def __post_init__(self):
        covers = frozenset((int(p), int(c)) for p, c in self.covers)
        object.__setattr__(self, "covers", covers)
        parents = {}
        for p, c in covers:
            if not (1 <= p <= self.k + 1 and 2 <= c <= self.k + 1):
                raise DomainError(f"cover ({p},{c}) outside labels 1..{self.k + 1}")
            if c in parents:
                raise DomainError(f"label {c} has two parents")
            parents[c] = p
        if set(parents) != set(range(2, self.k + 2)):
            raise DomainError("every label 2..k+1 needs exactly one parent")
        for j in parents:
            seen = set()
            while j != 1:
                if j in seen:
                    raise DomainError("cover relation has a cycle")
                seen.add(j)
                j = parents[j]

    @classmethod
    def from_parents(cls, k: int, parents: dict) -> "DomainPoset":
        return cls(k, frozenset((p, c) for c, p in parents.items()))

    def parent(self, j: int) -> int:
        for p, c in self.covers:
            if c == j:
                return p
        raise DomainError(f"label {j} has no parent")

    def parents(self) -> tuple:
        """Parent labels of ``2, ..., k+1`` in order."""
        table = {c: p for p, c in self.covers}
        return tuple(table[j] for j in range(2, self.k + 2))

    def children(self, j: int) -> list:
        return sorted(c for p, c in self.covers if p == j)

    def leaves(self) -> list:
        inner = {p for p, _ in self.covers}
        return [j for j in range(2, self.k + 2) if j not in inner]

    def sorted_covers(self) -> list:
        return sorted(self.covers)

    def __str__(self):
        return render_domain(self)


def upper_echelon_domain(x) -> DomainPoset:
    """``T_D``: cover edges are the parent/child edges of the ``mu`` tree."""
    mu = x.mu if isinstance(x, Pair) else x
    if not isinstance(mu, CollapseMap):
        mu = CollapseMap(tuple(mu))
    tree = mu_to_tree(mu)
    return DomainPoset(mu.k, frozenset((p, c) for p, c, _ in tree.edges()))


def pushforward_domain(sigma: TimePermutation, d: DomainPoset) -> DomainPoset:
    """Relabel every cover ``(j, m)`` as ``(sigma(j), sigma(m))``."""
    if sigma.k != d.k:
        raise DomainError("permutation and domain disagree on k")
    return DomainPoset(d.k, frozenset((sigma(p), sigma(c)) for p, c in d.covers))


def reference_domain(ref: Pair, check: bool = True) -> DomainPoset:
    """``T_R``: inside each left branch hanging under ``z``, the plus nodes
    form a chain below ``t_z`` and so do the minus nodes.

    With ``check=False`` the same rule is applied to any pair (the chains then
    follow label order within each sign).
    """
    if check:
        from kmgame.moves import is_reference

        if not is_reference(ref):
            raise NotReference(f"not a reference pair: {ref}")
    parents = {}
    for z, branch in left_branches(ref.mu).items():
        last = {}
        for j in branch:
            s = ref.sgn[j]
            parents[j] = last.get(s, z)
            last[s] = j
    return DomainPoset.from_parents(ref.k, parents)


def linear_extensions(d: DomainPoset) -> list:
    """All ``sigma`` with ``t_1 >= t_sigma(2) >= ... >= t_sigma(k+1)`` inside
    ``d``, i.e. orders listing each parent before its children; sorted."""
    return [TimePermutation(o) for o in _backend.topological_orders(d.parents())]


def count_linear_extensions(d: DomainPoset) -> int:
    """Hook length count ``k! / prod(subtree sizes)`` for a forest."""
    size = {j: 1 for j in range(1, d.k + 2)}
    parents = dict((c, p) for p, c in d.covers)
    for j in sorted(parents, key=lambda j: -_depth(parents, j)):
        size[parents[j]] += size[j]
    denom = 1
    for j in range(2, d.k + 2):
        denom *= size[j]
    return math.factorial(d.k) // denom


def _depth(parents: dict, j: int) -> int:
    n = 0
    while j != 1:
        j = parents[j]
        n += 1
    return n


def domain_volume(d: DomainPoset) -> float:
    """Fraction of the cube ``[0, t_1]^k`` occupied by ``d``."""
    return count_linear_extensions(d) / math.factorial(d.k)


def domain_indicator(d: DomainPoset, point: Sequence[float]) -> bool:
    """True iff ``point = (t_1, ..., t_{k+1})`` satisfies every cover (non-strict)."""
    if len(point) != d.k + 1:
        raise DomainError(f"expected {d.k + 1} coordinates, got {len(point)}")
    return all(point[c - 1] <= point[p - 1] for p, c in d.covers)


def simplex_domain(sigma: TimePermutation) -> DomainPoset:
    """The chain ``t_1 >= t_sigma(2) >= ... >= t_sigma(k+1)``."""
    order = (1,) + sigma.images
    return DomainPoset(sigma.k, frozenset(zip(order, order[1:])))


@dataclass
class PartitionReport:
    """Comparison of a class's source ``sigma`` multiset with ``T_R``'s
    linear extensions."""

    reference: Pair
    n_sources: int
    n_extensions: int
    duplicates: list = field(default_factory=list)
    missing: list = field(default_factory=list)
    extra: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.duplicates or self.missing or self.extra) and (
            self.n_sources == self.n_extensions
        )

    def to_json(self) -> dict:
        return {
            "reference": {"mu": list(self.reference.mu.values), "sgn": list(self.reference.sgn.signs)},
            "n_sources": self.n_sources,
            "n_extensions": self.n_extensions,
            "duplicates": [list(s.images) for s in self.duplicates],
            "missing": [list(s.images) for s in self.missing],
            "extra": [list(s.images) for s in self.extra],
            "pass": self.ok,
        }


def verify_class_partition(cls) -> PartitionReport:
    """Check that the permuted simplexes of a class tile its reference domain.

    The sources' ``sigma`` values must be distinct and must coincide with the
    linear extensions of ``T_R``; then the simplexes are disjoint up to ties
    and their union is ``T_R``.
    """
    exts = linear_extensions(reference_domain(cls.reference))
    seen: set = set()
    dups = []
    for s in cls.sources:
        if s.sigma in seen:
            dups.append(s.sigma)
        seen.add(s.sigma)
    ext_set = set(exts)
    return PartitionReport(
        cls.reference,
        len(cls.sources),
        len(exts),
        sorted(dups),
        sorted(ext_set - seen),
        sorted(seen - ext_set),
    )


# ---------------------------------------------------------------------------
# iterated integrals


class Limit(NamedTuple):
    """``t_var`` runs from ``t_lower`` (0 when ``lower`` is None) to ``t_upper``."""

    var: int
    lower: Optional[int]
    upper: int

    def __str__(self):
        lo = "0" if self.lower is None else f"t{self.lower}"
        return f"t{self.var}:[{lo},t{self.upper}]"


LIMIT_MODES = ("exact", "enlarged")


def iterated_limits(d: DomainPoset, outermost: Optional[int] = None, mode: str = "exact") -> list:
    """Nested integration limits, outermost first.

    The outermost variable (a leaf, ``t_{k+1}`` by default) ranges over
    ``[0, t_1]``.  The rest follow in pre-order from ``t_1`` with children in
    increasing label order; each is bounded above by its parent.  In
    ``"exact"`` mode the parent of the outermost variable is bounded below by
    it, so the nested integral describes ``d`` exactly.  ``"enlarged"`` mode
    drops that lower bound, giving the larger region used for estimates.
    """
    if mode not in LIMIT_MODES:
        raise ValueError(f"mode must be one of {LIMIT_MODES}")
    out_var = d.k + 1 if outermost is None else outermost
    if not 2 <= out_var <= d.k + 1:
        raise DomainError(f"outermost label {out_var} outside 2..{d.k + 1}")
    if d.children(out_var):
        raise DomainError(f"outermost variable t{out_var} is not a leaf")
    out_parent = d.parent(out_var)
    limits = [Limit(out_var, None, 1)]

    def walk(j):
        for c in d.children(j):
            if c == out_var:
                continue
            lower = out_var if (mode == "exact" and c == out_parent) else None
            limits.append(Limit(c, lower, j))
            walk(c)

    walk(1)
    return limits


def limit_blocks(limits: Sequence[Limit]) -> list:
    """Split the inner limits into independent blocks, one per child of ``t_1``.

    Blocks share no variables except ``t_1`` and the outermost variable, so
    their integrals factor.
    """
    blocks: list = []
    for lim in limits[1:]:
        if lim.upper == 1:
            blocks.append([])
        blocks[-1].append(lim)
    return blocks


def iterated_indicator(limits: Sequence[Limit], point: Sequence[float]) -> bool:
    """Membership of ``point = (t_1, ..., t_{k+1})`` in the nested region."""
    for lim in limits:
        v = point[lim.var - 1]
        lo = 0.0 if lim.lower is None else point[lim.lower - 1]
        if not (lo <= v <= point[lim.upper - 1]):
            return False
    return True


def render_limits(limits: Sequence[Limit]) -> str:
    return " ".join(str(lim) for lim in limits)


# ---------------------------------------------------------------------------
# serialization and rendering


def render_domain(d: DomainPoset) -> str:
    """Chains such as ``t3 <= t2 <= t1``, split wherever a node branches."""
    chains = []

    def walk(j, chain):
        kids = d.children(j)
        if not kids:
            chains.append(chain)
            return
        walk(kids[0], [kids[0]] + chain)
        for c in kids[1:]:
            walk(c, [c, j])

    walk(1, [1])
    return ", ".join(" <= ".join(f"t{j}" for j in ch) for ch in chains if len(ch) > 1)


def domain_to_json(d: DomainPoset) -> dict:
    return {"k": d.k, "covers": [list(c) for c in d.sorted_covers()]}


def domain_from_json(data: dict) -> DomainPoset:
    return DomainPoset(int(data["k"]), frozenset(tuple(c) for c in data["covers"]))
