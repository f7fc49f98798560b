import itertools
import math
from collections import deque

import pytest
from hypothesis import given, strategies as st

from kmgame.core import (
    CollapseMap,
    Pair,
    SignMap,
    TimePermutation,
    bare_skeleton,
    enumerate_pairs,
    is_tamed,
    is_upper_echelon,
    left_branches,
    make_pair,
    signed_skeleton,
    tamed_labeling,
)
from kmgame.errors import MoveNotAcceptable, NotReference, NotTamed, ResourceLimitError
from kmgame.moves import (
    SignedTriple,
    allowable_permutations,
    class_to_json,
    classify,
    is_acceptable,
    is_allowable,
    is_reference,
    reduce_to_tamed,
    reduce_to_upper_echelon,
    signed_km_move,
    to_reference,
    upper_echelon_classes,
    wild_move,
)

from strategies import pairs


def conjugate(pair, rho):
    """``(rho mu rho^-1, sgn rho^-1)`` written out directly."""
    k = pair.k
    mu = {rho(j): rho(pair.mu[j]) for j in range(2, k + 2)}
    sgn = {rho(j): pair.sgn[j] for j in range(2, k + 2)}
    return make_pair([mu[j] for j in range(2, k + 2)], [sgn[j] for j in range(2, k + 2)])


# -- signed KM moves -----------------------------------------------------------

def test_km_move_example():
    t = SignedTriple.from_pair(make_pair((1, 1, 2), "+-+"))
    assert is_acceptable(t.mu, 3)
    moved = signed_km_move(3, t)
    assert moved.pair == make_pair((1, 2, 1), "++-")
    assert moved.sigma.images == (2, 4, 3)


@pytest.mark.parametrize("mu,j", [((1, 1, 1), 2), ((1, 2, 3), 2), ((1, 1, 2), 2), ((1, 1), 3)])
def test_km_move_rejected(mu, j):
    t = SignedTriple.from_pair(make_pair(mu, "+" * len(mu)))
    assert not is_acceptable(t.mu, j)
    with pytest.raises(MoveNotAcceptable):
        signed_km_move(j, t)


@given(pairs(min_k=2), st.data())
def test_km_move_is_involution_and_keeps_skeleton(pair, data):
    moves = [j for j in range(2, pair.k + 1) if is_acceptable(pair.mu, j)]
    if not moves:
        return
    j = data.draw(st.sampled_from(moves))
    once = signed_km_move(j, SignedTriple.from_pair(pair))
    assert signed_skeleton(once.pair) == signed_skeleton(pair)
    assert is_acceptable(once.mu, j)
    twice = signed_km_move(j, once)
    assert twice.pair == pair and twice.sigma.is_identity()


# -- reductions ----------------------------------------------------------------

@given(pairs(max_k=9))
def test_reduce_to_tamed_properties(pair):
    tamed, sigma = reduce_to_tamed(*pair)
    assert is_tamed(*tamed)
    assert signed_skeleton(tamed) == signed_skeleton(pair)
    assert conjugate(pair, sigma) == tamed


@pytest.mark.parametrize("k", range(1, 6))
def test_reduce_equals_tamed_labeling(k):
    for pair in enumerate_pairs(k):
        tamed, _ = reduce_to_tamed(*pair)
        assert tamed == tamed_labeling(signed_skeleton(pair))


def test_tamed_pairs_are_fixed():
    for pair in enumerate_pairs(4):
        if is_tamed(*pair):
            tamed, sigma = reduce_to_tamed(*pair)
            assert tamed == pair and sigma.is_identity()


@given(pairs(max_k=9))
def test_reduce_to_upper_echelon(pair):
    mu, sigma = reduce_to_upper_echelon(pair.mu)
    assert is_upper_echelon(mu)
    assert bare_skeleton(mu) == bare_skeleton(pair.mu)
    plus = SignMap.all_plus(pair.k)
    assert conjugate(Pair(pair.mu, plus), sigma).mu == mu


def test_upper_echelon_class_sizes():
    for k in range(1, 6):
        classes = upper_echelon_classes(k)
        assert sum(len(v) for v in classes.values()) == math.factorial(k)
        for mu, members in classes.items():
            assert is_upper_echelon(mu)
            assert len({s for _, s in members}) == len(members)


# -- wild moves ----------------------------------------------------------------

def _binomial_count(ref):
    out = 1
    for branch in left_branches(ref.mu).values():
        out *= math.comb(len(branch), sum(ref.sgn[j] == "+" for j in branch))
    return out


def _brute_allowable(pair):
    """Every permutation of 2..k+1 checked against the allowability rules."""
    k = pair.k
    branches = left_branches(pair.mu).values()
    out = []
    for images in itertools.permutations(range(2, k + 2)):
        rho = TimePermutation(images)
        ok = all(sorted(rho(j) for j in b) == b for b in branches)
        ok = ok and all(
            rho(q) < rho(s)
            for b in branches for q, s in itertools.combinations(b, 2)
            if pair.sgn[q] == pair.sgn[s]
        )
        if ok:
            out.append(rho)
    return out


@pytest.mark.parametrize("k", range(1, 5))
def test_allowable_permutations_match_brute_force(k):
    for cls in classify(k):
        ref = cls.reference
        perms = allowable_permutations(ref)
        assert perms == sorted(_brute_allowable(ref))
        assert len(perms) == _binomial_count(ref)
        assert all(is_allowable(r, ref) for r in perms)


@given(pairs(max_k=8))
def test_to_reference_inverts_wild_move(pair):
    tamed, _ = reduce_to_tamed(*pair)
    ref, rho = to_reference(tamed)
    assert is_reference(ref)
    assert is_allowable(rho, ref)
    assert wild_move(rho, SignedTriple.from_pair(ref)).pair == tamed
    for rho2 in allowable_permutations(ref)[:10]:
        moved = wild_move(rho2, SignedTriple.from_pair(ref)).pair
        assert is_tamed(*moved)
        assert to_reference(moved) == (ref, rho2)


def test_wild_move_errors():
    ref = make_pair((1, 1, 1, 2, 4, 4), "++--+-")
    with pytest.raises(MoveNotAcceptable):
        wild_move(TimePermutation.transposition(6, 2, 3), SignedTriple.from_pair(ref))
    untamed = make_pair((1, 2, 1), "+-+")
    assert not is_tamed(*untamed)
    with pytest.raises(NotTamed):
        wild_move(TimePermutation.identity(3), SignedTriple.from_pair(untamed))
    with pytest.raises(NotTamed):
        to_reference(untamed)
    with pytest.raises(NotReference):
        allowable_permutations(make_pair((1, 1), "-+"))


# -- classification ------------------------------------------------------------

def _closure_classes(k):
    """Connected components of all pairs under KM moves and wild moves,
    found by breadth-first search.  Each pair carries the ``sigma`` of the
    path from the component's first pair."""
    seen = {}
    comps = []
    for start in enumerate_pairs(k):
        if start in seen:
            continue
        comp = {start: TimePermutation.identity(k)}
        queue = deque([SignedTriple.from_pair(start)])
        while queue:
            t = queue.popleft()
            nxt = [signed_km_move(j, t) for j in range(2, k + 1) if is_acceptable(t.mu, j)]
            if is_tamed(t.mu, t.sgn):
                nxt += [wild_move(r, t) for r in _brute_allowable(t.pair)]
            for u in nxt:
                if u.pair not in comp:
                    comp[u.pair] = u.sigma
                    queue.append(u)
        for p in comp:
            seen[p] = len(comps)
        comps.append(comp)
    return comps


@pytest.mark.parametrize("k", range(1, 5))
def test_classify_matches_move_closure(k):
    comps = _closure_classes(k)
    classes = classify(k)
    assert len(classes) == len(comps)
    by_ref = {}
    for comp in comps:
        refs = [p for p in comp if is_reference(p)]
        assert len(refs) == 1
        by_ref[refs[0]] = comp
    for cls in classes:
        comp = by_ref[cls.reference]
        assert {(s.mu, s.sgn) for s in cls.sources} == set(comp)
        # sigma is path independent: compare with the path through the BFS root
        to_ref = comp[cls.reference]
        for s in cls.sources:
            assert s.sigma == to_ref * comp[Pair(s.mu, s.sgn)].inverse()


def test_class_counts():
    assert [len(classify(k)) for k in range(1, 6)] == [2, 7, 30, 143, 728]


def test_small_classes():
    classes = classify(2)
    refs = [str(c.reference) for c in classes]
    assert len(refs) == 7
    assert sum(len(c.sources) for c in classes) == 8
    merged = [c for c in classes if len(c.members) > 1]
    assert [c.reference for c in merged] == [make_pair((1, 1), "+-")]


def test_classify_guards():
    with pytest.raises(ResourceLimitError):
        classify(8)
    with pytest.raises(ValueError):
        classify(0)


def test_class_json():
    data = class_to_json(classify(2)[0])
    assert set(data) >= {"reference", "members"}
