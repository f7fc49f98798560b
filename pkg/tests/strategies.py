"""Hypothesis strategies shared by the test modules."""

from hypothesis import strategies as st

from kmgame.core import CollapseMap, Pair, SignMap, TimePermutation


@st.composite
def collapse_maps(draw, min_k=1, max_k=8):
    k = draw(st.integers(min_k, max_k))
    return CollapseMap(tuple(draw(st.integers(1, j - 1)) for j in range(2, k + 2)))


@st.composite
def pairs(draw, min_k=1, max_k=8):
    mu = draw(collapse_maps(min_k, max_k))
    signs = draw(st.lists(st.sampled_from("+-"), min_size=mu.k, max_size=mu.k))
    return Pair(mu, SignMap(tuple(signs)))


@st.composite
def time_permutations(draw, k):
    return TimePermutation(tuple(draw(st.permutations(range(2, k + 2)))))
