import json
import math
from collections import defaultdict

import pytest
from hypothesis import given, strategies as st

from kmgame.core import (
    MINUS,
    PLUS,
    CollapseMap,
    SignMap,
    SignedTree,
    TimePermutation,
    bare_skeleton,
    catalan,
    enumerate_collapse_maps,
    enumerate_pairs,
    enumerate_signed_skeletons,
    enumerate_skeletons,
    is_tamed,
    is_upper_echelon,
    left_branches,
    make_pair,
    mu_to_tree,
    pair_from_json,
    pair_to_json,
    parse_sign,
    signed_skeleton,
    tamed_labeling,
    tier,
    tree_to_dot,
    tree_to_mu,
    tree_to_text,
    upper_echelon_labeling,
    validate_collapse_map,
)
from kmgame.errors import InadmissibleTree, InvalidCollapseMap, InvalidSignMap

from strategies import collapse_maps, pairs, time_permutations


# -- validation ----------------------------------------------------------------

@pytest.mark.parametrize("values,ok", [
    ((1,), True),
    ((1, 1, 2), True),
    ((1, 2, 3, 4), True),
    ((2,), False),
    ((1, 3), False),
    ((1, 1, 0), False),
    ((), False),
    (("a",), False),
])
def test_validate_collapse_map(values, ok):
    assert validate_collapse_map(values) is ok
    if not ok:
        with pytest.raises(InvalidCollapseMap):
            CollapseMap(values)


def test_sign_parsing():
    assert parse_sign("+") == PLUS and parse_sign("minus") == MINUS and parse_sign(-1) == MINUS
    with pytest.raises(InvalidSignMap):
        parse_sign("x")
    with pytest.raises(InvalidSignMap):
        make_pair((1, 1), "+")


def test_enumeration_sizes_are_factorials():
    for k in range(1, 7):
        maps = enumerate_collapse_maps(k)
        assert len(maps) == len(set(maps)) == math.factorial(k)
        assert len(enumerate_pairs(k)) == 2 ** k * math.factorial(k)
    with pytest.raises(ValueError):
        enumerate_collapse_maps(0)


# -- trees ---------------------------------------------------------------------

def test_tree_of_alpha():
    tree = mu_to_tree(CollapseMap((1, 1, 1, 2, 3)))
    # left = next label with the same mu value, right = first label mapping here
    assert set(tree.edges()) == {(1, 2, "R"), (2, 3, "L"), (3, 4, "L"), (2, 5, "R"), (3, 6, "R")}


def _naive_tree(mu):
    """Children straight from the definition, without the library."""
    k = mu.k
    left, right = {}, {}
    for j in range(2, k + 2):
        same = [i for i in range(j + 1, k + 2) if mu[i] == mu[j]]
        if same:
            left[j] = same[0]
    for j in range(1, k + 2):
        kids = [i for i in range(2, k + 2) if mu[i] == j]
        if kids:
            right[j] = kids[0]
    return left, right


@given(collapse_maps())
def test_tree_matches_definition(mu):
    tree = mu_to_tree(mu)
    left, right = _naive_tree(mu)
    for j in range(1, mu.k + 2):
        assert tree.left[j] == left.get(j)
        assert tree.right[j] == right.get(j)


@given(pairs())
def test_tree_round_trip(pair):
    tree = mu_to_tree(pair.mu, pair.sgn)
    assert tree_to_mu(tree) == (pair.mu, pair.sgn)
    rebuilt = SignedTree.from_edges(pair.k, tree.edges(), pair.sgn.signs)
    assert rebuilt == tree


@given(pairs())
def test_json_round_trip(pair):
    data = json.loads(json.dumps(pair_to_json(pair)))
    assert pair_from_json(data) == pair


def test_json_rejects_inconsistent_edges():
    data = pair_to_json(make_pair((1, 1, 2), "+-+"))
    data["edges"][0][1] = 3
    with pytest.raises((InadmissibleTree, InvalidCollapseMap)):
        pair_from_json(data)


def test_from_edges_rejects_bad_tree():
    with pytest.raises(InadmissibleTree):
        SignedTree.from_edges(2, [(1, 2, "R"), (1, 3, "L")])


@given(collapse_maps())
def test_tier_recursion(mu):
    for j in mu.labels():
        expected = 1 if mu[j] == 1 else tier(mu, mu[j]) + 1
        assert tier(mu, j) == expected


@given(collapse_maps())
def test_left_branches_partition_labels(mu):
    branches = left_branches(mu)
    assert sorted(j for b in branches.values() for j in b) == list(mu.labels())
    tree = mu_to_tree(mu)
    for z, branch in branches.items():
        assert tree.left_branch(tree.right[z]) == branch


# -- skeletons -----------------------------------------------------------------

def test_catalan_numbers():
    assert [catalan(n) for n in range(1, 8)] == [1, 2, 5, 14, 42, 132, 429]


@pytest.mark.parametrize("k", range(1, 8))
def test_skeleton_dedupe_matches_catalan(k):
    codes = {bare_skeleton(mu).code() for mu in enumerate_collapse_maps(k)}
    assert len(codes) == catalan(k)
    assert codes == {s.code() for s in enumerate_skeletons(k)}


@pytest.mark.parametrize("k", range(1, 7))
def test_one_upper_echelon_map_per_skeleton(k):
    by_shape = defaultdict(list)
    for mu in enumerate_collapse_maps(k):
        if is_upper_echelon(mu):
            by_shape[bare_skeleton(mu).code()].append(mu)
    assert len(by_shape) == catalan(k)
    for sk in enumerate_skeletons(k):
        labeled = upper_echelon_labeling(sk)
        assert by_shape[sk.code()] == [labeled]
        assert bare_skeleton(labeled) == sk


@pytest.mark.parametrize("k", range(1, 6))
def test_tamed_labeling_is_the_unique_tamed_pair(k):
    """Brute force: among all labelings of a signed skeleton exactly one is tamed."""
    tamed = defaultdict(list)
    for pair in enumerate_pairs(k):
        if is_tamed(*pair):
            tamed[signed_skeleton(pair).code()].append(pair)
    skeletons = enumerate_signed_skeletons(k)
    assert len(skeletons) == 2 ** k * catalan(k)
    for sk in skeletons:
        assert tamed[sk.code()] == [tamed_labeling(sk)]


def test_tamed_labeling_queue_order():
    # top branch - - + +: the + nodes are visited before the - nodes
    sk = signed_skeleton(make_pair((1, 1, 1, 1, 2, 3, 4, 5), "--++++++"))
    pair = tamed_labeling(sk)
    assert pair.mu.values == (1, 1, 1, 1, 4, 5, 2, 3)
    assert is_tamed(*pair)


@given(pairs(max_k=7))
def test_signed_skeleton_keeps_size_and_signs(pair):
    sk = signed_skeleton(pair)
    assert sk.k == pair.k
    assert sorted(n.sign for n in sk.paths().values()) == sorted(pair.sgn.signs)
    assert tamed_labeling(sk) == tamed_labeling(sk.unsigned().with_signs(
        [n.sign for n in sk.paths().values()]))


# -- time permutations ---------------------------------------------------------

@given(st.integers(1, 7).flatmap(lambda k: st.tuples(time_permutations(k), time_permutations(k))))
def test_permutation_group_laws(ab):
    a, b = ab
    e = TimePermutation.identity(a.k)
    assert a * e == a == e * a
    assert (a * a.inverse()).is_identity()
    assert (a * b).inverse() == b.inverse() * a.inverse()
    for j in range(1, a.k + 2):
        assert (a * b)(j) == a(b(j))
    assert a(1) == 1


def test_transposition():
    t = TimePermutation.transposition(4, 3, 4)
    assert t.images == (2, 4, 3, 5)
    assert (t * t).is_identity()
    with pytest.raises(ValueError):
        TimePermutation((2, 2))


# -- rendering -----------------------------------------------------------------

def test_dot_output():
    tree = mu_to_tree(CollapseMap((1, 1, 2)), SignMap(("-", "+", "+")))
    assert tree_to_dot(tree) == (
        "digraph tree {\n"
        "  node [shape=circle];\n"
        '  n1 [label="1"];\n'
        '  n2 [label="2-"];\n'
        '  n3 [label="3+"];\n'
        '  n4 [label="4+"];\n'
        '  n1 -> n2 [label="R"];\n'
        '  n2 -> n3 [label="L"];\n'
        '  n2 -> n4 [label="R"];\n'
        "}\n"
    )


def test_text_output():
    tree = mu_to_tree(CollapseMap((1, 1, 2)), SignMap(("-", "+", "+")))
    assert tree_to_text(tree) == "1\n  R 2-\n    L 3+\n    R 4+\n"
