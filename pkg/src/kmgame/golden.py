"""Worked examples with known answers, used by the ``golden`` verify suite."""

from __future__ import annotations

from kmgame.core import CollapseMap, TimePermutation, make_pair, mu_to_tree, tier
from kmgame.domains import (
    iterated_limits,
    limit_blocks,
    linear_extensions,
    reference_domain,
    render_limits,
    upper_echelon_domain,
)
from kmgame.dtree import build_dtree, check_factorization, dtree_to_text, mark_couplings
from kmgame.moves import (
    SignedTriple,
    allowable_permutations,
    reduce_to_tamed,
    reduction_trace,
    to_reference,
    upper_echelon_classes,
    wild_move,
)

# bubbling sweeps of the queue reduction, starting pair first
REDUCTION_START = ((1, 1, 1, 2, 2, 1, 6, 7, 6, 7, 5, 11, 11), "--+-+++--++-+")
REDUCTION_SWEEPS = (
    (((6, 7), (5, 6)), (1, 1, 1, 1, 2, 2, 7, 5, 7, 5, 6, 11, 11), "--++-++--++-+"),
    (((8, 9), (7, 8), (6, 7)), (1, 1, 1, 1, 5, 2, 2, 8, 8, 5, 7, 11, 11), "--++--++-++-+"),
    (((10, 11), (9, 10), (8, 9), (7, 8)), (1, 1, 1, 1, 5, 5, 2, 2, 9, 9, 8, 7, 7), "--++-+-++-+-+"),
    (((12, 13), (11, 12), (10, 11)), (1, 1, 1, 1, 5, 5, 2, 2, 7, 9, 9, 8, 7), "--++-+-+-+-++"),
    (((13, 14), (12, 13), (11, 12)), (1, 1, 1, 1, 5, 5, 2, 2, 7, 7, 9, 9, 8), "--++-+-+-++-+"),
)
TAMED_TIERS = (1, 1, 1, 1, 2, 2, 2, 2, 3, 3, 3, 3, 3)

# wild moves of one reference pair: images of (2, 3, 4, 6, 7), then (mu, sgn)
WILD_REFERENCE = ((1, 1, 1, 2, 4, 4), "++--+-")
WILD_TABLE = (
    ((2, 3, 4, 6, 7), (1, 1, 1, 2, 4, 4), "++--+-"),
    ((2, 4, 3, 6, 7), (1, 1, 1, 2, 3, 3), "+-+-+-"),
    ((3, 4, 2, 6, 7), (1, 1, 1, 3, 2, 2), "-++-+-"),
    ((2, 3, 4, 7, 6), (1, 1, 1, 2, 4, 4), "++---+"),
    ((2, 4, 3, 7, 6), (1, 1, 1, 2, 3, 3), "+-+--+"),
    ((3, 4, 2, 7, 6), (1, 1, 1, 3, 2, 2), "-++--+"),
)
WILD_REFERENCE_DOMAIN = {(1, 2), (2, 3), (1, 4), (2, 5), (4, 6), (4, 7)}

ECHELON_ALPHA = (1, 1, 1, 2, 3)
ECHELON_ALPHA_DOMAIN = {(1, 2), (2, 3), (3, 4), (3, 6), (2, 5)}

SMALL_REFERENCE = ((1, 1, 3), "+-+")
SMALL_DTREE = "D1: r+ D2, r- D3\nD2+: ls F, r+ F, r- F\nD3-: ls F, r+ C4, r- F\n"
SMALL_LIMITS = "t4:[0,t1] t2:[0,t1] t3:[t4,t1]"

NINE_REFERENCE = ((1, 1, 1, 2, 2, 2, 4, 6), "++-+--++")
NINE_DTREE = (
    "D1: r+ D2, r- D4\n"
    "D2+: ls D3, r+ D5, r- D6\n"
    "D3+: ls F, r+ F, r- F\n"
    "D4-: ls F, r+ D8, r- F\n"
    "D5+: ls F, r+ F, r- F\n"
    "D6-: ls D7, r+ C9, r- F\n"
    "D7-: ls F, r+ F, r- F\n"
    "D8+: ls F, r+ F, r- F\n"
)
NINE_BLOCKS = ("t2:[0,t1] t3:[0,t2] t5:[0,t2] t6:[0,t2] t7:[0,t6]", "t4:[0,t1] t8:[0,t4]")

RAW_ENTANGLED = ((1, 1, 2), "-++")


def _check(name, ok, detail=""):
    return {"test": name, "pass": bool(ok), "detail": detail}


def run_golden() -> list:
    """Evaluate every worked example; one result dict per example."""
    out = []

    start = make_pair(*REDUCTION_START)
    steps = reduction_trace(*start)
    expected = [(moves, make_pair(m, s)) for moves, m, s in REDUCTION_SWEEPS]
    got = [(st.moves, st.pair) for st in steps]
    out.append(_check("reduction sweeps", got == expected, f"{len(got)} sweeps"))
    tamed, _ = reduce_to_tamed(*start)
    out.append(_check("reduction result", tamed == expected[-1][1], str(tamed)))
    tiers = tuple(tier(tamed.mu, j) for j in tamed.mu.labels())
    out.append(_check("tamed tiers", tiers == TAMED_TIERS, str(tiers)))

    ref = make_pair(*WILD_REFERENCE)
    perms = allowable_permutations(ref)
    out.append(_check("allowable count", len(perms) == 6, str(len(perms))))
    table_ok = True
    for images, m, s in WILD_TABLE:
        mapping = dict(zip((2, 3, 4, 6, 7), images))
        rho = TimePermutation.from_mapping(ref.k, mapping)
        moved = wild_move(rho, SignedTriple.from_pair(ref))
        table_ok &= moved.pair == make_pair(m, s) and rho in perms
        table_ok &= to_reference(moved.pair) == (ref, rho)
    out.append(_check("wild move table", table_ok))
    dom = reference_domain(ref)
    out.append(_check("wild reference domain", set(dom.covers) == WILD_REFERENCE_DOMAIN, str(dom)))

    alpha = CollapseMap(ECHELON_ALPHA)
    tree = mu_to_tree(alpha)
    edges = {(p, c) for p, c, _ in tree.edges()}
    td = upper_echelon_domain(alpha)
    exts = set(linear_extensions(td))
    members = upper_echelon_classes(5)[alpha]
    out.append(_check("echelon tree", edges == ECHELON_ALPHA_DOMAIN))
    out.append(_check("echelon domain", set(td.covers) == ECHELON_ALPHA_DOMAIN, str(td)))
    out.append(_check(
        "echelon class", len(members) == 8 and exts == {s for _, s in members} and len(exts) == 8,
        f"{len(members)} members",
    ))

    small = make_pair(*SMALL_REFERENCE)
    out.append(_check("small dtree", dtree_to_text(build_dtree(small)) == SMALL_DTREE))
    lims = render_limits(iterated_limits(reference_domain(small)))
    out.append(_check("small limits", lims == SMALL_LIMITS, lims))
    marks = mark_couplings(build_dtree(small))
    out.append(_check(
        "small markings",
        marks.contracts_phi[2] and marks.contracts_phi[3] and marks.contracts_rough[3]
        and not marks.contracts_rough[2],
    ))

    nine = make_pair(*NINE_REFERENCE)
    out.append(_check("nine-node dtree", dtree_to_text(build_dtree(nine)) == NINE_DTREE))
    blocks = tuple(
        render_limits(b)
        for b in limit_blocks(iterated_limits(reference_domain(nine), mode="enlarged"))
    )
    out.append(_check("nine-node limit blocks", blocks == NINE_BLOCKS, " | ".join(blocks)))

    raw = make_pair(*RAW_ENTANGLED)
    out.append(_check("raw form entangled", not check_factorization(raw)))
    out.append(_check("merged form factors", check_factorization(small)))
    return out
