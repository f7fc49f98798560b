"""Signed KM moves, wild moves and the classification of signed Duhamel terms.

Moves act on triples ``(mu, sigma, sgn)``.  An adjacent move ``KM(j, j+1)``
conjugates ``mu`` by the transposition ``tau = (j, j+1)``, composes ``sigma``
on the left with ``tau`` and relabels the signs, so that the Duhamel integral
over ``t_1 >= t_sigma(2) >= ... >= t_sigma(k+1)`` is unchanged.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from kmgame import _backend, _pykernels
from kmgame.core import (
    MINUS,
    PLUS,
    CollapseMap,
    Pair,
    SignMap,
    TimePermutation,
    is_tamed,
    left_branches,
    make_pair,
)
from kmgame.errors import MoveNotAcceptable, NotReference, NotTamed, ResourceLimitError

DEFAULT_MAX_K = 7


@dataclass(frozen=True)
class SignedTriple:
    """Collapsing map, time permutation and sign map sharing one ``k``."""

    mu: CollapseMap
    sigma: TimePermutation
    sgn: SignMap

    def __post_init__(self):
        if not (self.mu.k == self.sigma.k == self.sgn.k):
            raise ValueError("mu, sigma and sgn must share k")

    @classmethod
    def from_pair(cls, pair: Pair, sigma: Optional[TimePermutation] = None) -> "SignedTriple":
        return cls(pair.mu, sigma or TimePermutation.identity(pair.k), pair.sgn)

    @property
    def k(self) -> int:
        return self.mu.k

    @property
    def pair(self) -> Pair:
        return Pair(self.mu, self.sgn)


def _conjugate(pair: Pair, rho: TimePermutation) -> Pair:
    """``(rho mu rho^-1, sgn rho^-1)``."""
    k = pair.k
    inv = rho.inverse()
    mu = tuple(rho(pair.mu[inv(j)]) for j in range(2, k + 2))
    sgn = tuple(pair.sgn[inv(j)] for j in range(2, k + 2))
    return Pair(CollapseMap(mu), SignMap(sgn))


def is_acceptable(mu: CollapseMap, j: int) -> bool:
    """``KM(j, j+1)`` is acceptable iff ``mu(j) != mu(j+1)`` and ``mu(j+1) < j``."""
    if not 2 <= j <= mu.k:
        return False
    return mu[j] != mu[j + 1] and mu[j + 1] < j


def signed_km_move(j: int, t: SignedTriple) -> SignedTriple:
    """Apply the adjacent move ``KM(j, j+1)``.

    Raises
    ------
    MoveNotAcceptable
        If ``mu(j) == mu(j+1)`` or ``mu(j+1) >= j``.
    """
    if not is_acceptable(t.mu, j):
        raise MoveNotAcceptable(f"KM({j},{j + 1}) is not acceptable for mu={t.mu}")
    tau = TimePermutation.transposition(t.k, j, j + 1)
    p = _conjugate(t.pair, tau)
    return SignedTriple(p.mu, tau * t.sigma, p.sgn)


class ReductionStep(NamedTuple):
    """One bubbling sweep: the moves ``KM(i, i+1)`` applied, then the state."""

    moves: tuple
    pair: Pair


def _reduce(mu: CollapseMap, sgn: SignMap, signed: bool):
    m, s, sig = _backend.queue_reduce(mu.values, sgn.as_ints(), signed)
    return m, s, sig


def reduce_to_tamed(mu: CollapseMap, sgn: SignMap):
    """Queue reduction to the tamed form of the signed skeleton.

    Each dequeued node ``l`` collects the labels ``j, j+1, ...`` with
    ``mu = l``; when the next label does not map to ``l``, the smallest
    ``r > j`` with ``mu(r) = l`` is bubbled down with ``KM(r-1, r), ...,
    KM(j, j+1)``.  The branch's ``+`` nodes are enqueued before its ``-``
    nodes.

    Returns
    -------
    (Pair, TimePermutation)
        The tamed pair and the accumulated ``sigma``.
    """
    m, s, sig = _reduce(mu, sgn, True)
    return make_pair(m, s), TimePermutation(sig)


def reduce_to_upper_echelon(mu: CollapseMap):
    """Unsigned queue reduction; returns ``(upper echelon mu, sigma)``."""
    m, _, sig = _reduce(mu, SignMap.all_plus(mu.k), False)
    return CollapseMap(m), TimePermutation(sig)


def reduction_trace(mu: CollapseMap, sgn: SignMap) -> list:
    """The sweeps of :func:`reduce_to_tamed`, one :class:`ReductionStep` each."""
    trace: list = []
    _pykernels.queue_reduce(mu.values, sgn.as_ints(), True, trace)
    return [
        ReductionStep(tuple((i, i + 1) for i in moves), make_pair(m, s))
        for moves, m, s in trace
    ]


# ---------------------------------------------------------------------------
# wild moves


def is_reference(pair: Pair) -> bool:
    """Tamed and every left branch lists its ``+`` nodes before its ``-`` nodes."""
    if not is_tamed(pair.mu, pair.sgn):
        return False
    for branch in left_branches(pair.mu).values():
        signs = [pair.sgn[j] for j in branch]
        if signs != sorted(signs, key=lambda s: s != PLUS):
            return False
    return True


def is_allowable(rho: TimePermutation, pair: Pair) -> bool:
    """``rho`` maps every left branch onto itself and keeps same-sign order."""
    for branch in left_branches(pair.mu).values():
        if sorted(rho(j) for j in branch) != branch:
            return False
        for q, s in itertools.combinations(branch, 2):
            if pair.sgn[q] == pair.sgn[s] and not rho(q) < rho(s):
                return False
    moved = {j for j in range(2, pair.k + 2) if rho(j) != j}
    in_branches = {j for b in left_branches(pair.mu).values() for j in b}
    return moved <= in_branches


def wild_move(rho: TimePermutation, t: SignedTriple) -> SignedTriple:
    """``mu' = rho mu rho^-1``, ``sigma' = rho sigma``, ``sgn' = sgn rho^-1``.

    Raises
    ------
    NotTamed
        If the input pair is not tamed.
    MoveNotAcceptable
        If ``rho`` is not allowable for the input pair.
    """
    if rho.k != t.k:
        raise MoveNotAcceptable("permutation size differs from k")
    if not is_tamed(t.mu, t.sgn):
        raise NotTamed(f"wild moves need a tamed pair, got {t.pair}")
    if not is_allowable(rho, t.pair):
        raise MoveNotAcceptable(f"rho={rho} is not allowable for {t.pair}")
    p = _conjugate(t.pair, rho)
    return SignedTriple(p.mu, rho * t.sigma, p.sgn)


def to_reference(pair: Pair):
    """Reference pair of a tamed pair and the ``rho`` leading back to it.

    Every left branch is stably sorted to a ``+`` block followed by a ``-``
    block.  The ``i``-th ``+`` slot of the reference is sent by ``rho`` to the
    position of the ``i``-th ``+`` node of the input, and likewise for ``-``,
    so ``wild_move(rho, reference)`` reproduces ``pair``.
    """
    if not is_tamed(pair.mu, pair.sgn):
        raise NotTamed(f"to_reference needs a tamed pair, got {pair}")
    mapping = {}
    for branch in left_branches(pair.mu).values():
        plus = [j for j in branch if pair.sgn[j] == PLUS]
        minus = [j for j in branch if pair.sgn[j] == MINUS]
        for slot, j in zip(branch, plus + minus):
            mapping[slot] = j
    rho = TimePermutation.from_mapping(pair.k, mapping)
    ref = _conjugate(pair, rho.inverse())
    return ref, rho


def allowable_permutations(ref: Pair) -> list:
    """All allowable ``rho`` for a reference pair, sorted by images.

    A branch of length ``n`` with ``p`` plus nodes contributes ``C(n, p)``
    choices of where the plus nodes go.
    """
    if not is_reference(ref):
        raise NotReference(f"not a reference pair: {ref}")
    per_branch = []
    for branch in left_branches(ref.mu).values():
        n_plus = sum(ref.sgn[j] == PLUS for j in branch)
        plus, minus = branch[:n_plus], branch[n_plus:]
        options = []
        for pos in itertools.combinations(branch, n_plus):
            rest = [j for j in branch if j not in pos]
            options.append(dict(zip(plus + minus, list(pos) + rest)))
        per_branch.append(options)
    out = []
    for combo in itertools.product(*per_branch):
        mapping = {}
        for part in combo:
            mapping.update(part)
        out.append(TimePermutation.from_mapping(ref.k, mapping))
    return sorted(out)


# ---------------------------------------------------------------------------
# classification


class Source(NamedTuple):
    """An original signed pair and the ``sigma`` placing it inside its class."""

    mu: CollapseMap
    sgn: SignMap
    sigma: TimePermutation


@dataclass
class ReferenceClass:
    """All signed pairs whose integrals combine into one reference integral.

    ``members`` holds ``(tamed pair, rho)`` with ``rho`` taking the reference
    to that tamed pair; ``sources`` holds every original pair with the
    ``sigma`` such that its Duhamel integral is the reference integrand over
    ``t_1 >= t_sigma(2) >= ... >= t_sigma(k+1)``.
    """

    reference: Pair
    members: list = field(default_factory=list)
    sources: list = field(default_factory=list)

    @property
    def k(self) -> int:
        return self.reference.k

    def sigma_set(self) -> set:
        return {s.sigma for s in self.sources}


def classify(k: int, max_k: int = DEFAULT_MAX_K) -> list:
    """Group all ``2^k k!`` signed pairs by reference pair.

    Each pair is reduced to tamed form (giving ``sigma_1``) and then taken
    to its reference by ``rho^-1``, so its ``sigma`` is ``rho^-1 sigma_1``.

    Raises
    ------
    ResourceLimitError
        If ``k > max_k``.
    """
    if k < 1:
        raise ValueError("coupling order k must be at least 1")
    if k > max_k:
        raise ResourceLimitError(f"classify(k={k}) exceeds the cap k <= {max_k}")
    signs = [(s, SignMap(s)) for s in itertools.product((1, -1), repeat=k)]
    maps = [CollapseMap(v) for v in itertools.product(*[range(1, j) for j in range(2, k + 2)])]
    tamed_cache: dict = {}
    classes: dict = {}
    for mu in maps:
        for s_int, sgn in signs:
            m, s, sig = _backend.queue_reduce(mu.values, s_int, True)
            key = (m, s)
            hit = tamed_cache.get(key)
            if hit is None:
                tamed = make_pair(m, tuple(PLUS if x > 0 else MINUS for x in s))
                ref, rho = to_reference(tamed)
                rkey = ref.key()
                cls = classes.get(rkey)
                if cls is None:
                    cls = classes[rkey] = ReferenceClass(ref)
                cls.members.append((tamed, rho))
                hit = tamed_cache[key] = (cls, rho.inverse())
            cls, rho_inv = hit
            cls.sources.append(Source(mu, sgn, rho_inv * TimePermutation(sig)))
    out = [classes[key] for key in sorted(classes)]
    for cls in out:
        cls.members.sort(key=lambda m: m[0].key())
    return out


def upper_echelon_classes(k: int, max_k: int = DEFAULT_MAX_K) -> dict:
    """Map each upper echelon ``mu`` to its ``[(mu, sigma), ...]`` sources."""
    if k > max_k:
        raise ResourceLimitError(f"k={k} exceeds the cap k <= {max_k}")
    out: dict = {}
    ones = (1,) * k
    for v in itertools.product(*[range(1, j) for j in range(2, k + 2)]):
        m, _, sig = _backend.queue_reduce(v, ones, False)
        out.setdefault(CollapseMap(m), []).append((CollapseMap(v), TimePermutation(sig)))
    return dict(sorted(out.items()))


def triple_to_json(t: SignedTriple) -> dict:
    return {
        "k": t.k,
        "mu": list(t.mu.values),
        "sgn": list(t.sgn.signs),
        "sigma": list(t.sigma.images),
    }


def class_to_json(cls: ReferenceClass) -> dict:
    ref = cls.reference
    return {
        "reference": {"mu": list(ref.mu.values), "sgn": list(ref.sgn.signs)},
        "members": [
            {"mu": list(p.mu.values), "sgn": list(p.sgn.signs), "rho": list(r.images)}
            for p, r in cls.members
        ],
        "sources": [
            {"mu": list(s.mu.values), "sgn": list(s.sgn.signs), "sigma": list(s.sigma.images)}
            for s in cls.sources
        ],
    }
