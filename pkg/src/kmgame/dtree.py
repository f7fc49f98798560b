"""Duhamel trees: the factorized form of a signed Duhamel term.

Every node ``j <= k`` becomes a cubic factor ``D^(j)`` with three slots.  For a
``+`` node the slots are multiplied as ``ls * r+ * conj(r-)``, for a ``-``
node as ``ls * conj(r+) * r-``:

* ``ls``: the next node of ``j``'s left branch carrying the same sign;
* ``r+`` / ``r-``: the first ``+`` / ``-`` node of the branch under ``j``'s
  right child.

Empty slots hold the free factor ``F = U(-t_{k+1}) phi``; node ``k+1`` is
the rough cubic term ``C^(k+1)``.  The root ``D^(1)`` has only ``r+`` (the
``x_1`` factor) and ``r-`` (the conjugated ``x_1'`` factor).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

from kmgame.core import MINUS, PLUS, Pair, left_branches
from kmgame.domains import (
    DomainPoset,
    Limit,
    iterated_limits,
    reference_domain,
    upper_echelon_domain,
)
from kmgame.errors import DomainError, NotReference

SLOTS = ("ls", "r+", "r-")


class Slot(NamedTuple):
    """Content of a child slot: ``kind`` is ``"D"``, ``"F"`` or ``"C"``.

    ``conj`` marks factors entering the product complex conjugated.
    """

    kind: str
    label: Optional[int]
    conj: bool

    def name(self) -> str:
        return "F" if self.kind == "F" else f"{self.kind}{self.label}"


class DNode(NamedTuple):
    label: int
    sign: Optional[str]
    slots: dict  # slot name -> Slot, "ls" absent at the root

    def children(self) -> list:
        return [self.slots[s] for s in SLOTS if s in self.slots]


@dataclass(frozen=True)
class DTree:
    """Cubic factors ``D^(1..k)`` of one signed pair, with the pair kept."""

    pair: Pair
    nodes: dict  # label -> DNode

    @property
    def k(self) -> int:
        return self.pair.k

    def parent(self, j: int) -> Optional[int]:
        for node in self.nodes.values():
            for slot in node.children():
                if slot.kind != "F" and slot.label == j:
                    return node.label
        return None

    def ancestors(self, j: int) -> list:
        out = []
        p = self.parent(j)
        while p is not None:
            out.append(p)
            p = self.parent(p)
        return out


def factor_tree(pair: Pair) -> DTree:
    """Factor structure of any signed pair; see the module docstring."""
    k = pair.k
    branches = left_branches(pair.mu)
    sgn = pair.sgn

    def slot(j, conj):
        if j is None:
            return Slot("F", None, conj)
        return Slot("C" if j == k + 1 else "D", j, conj)

    def firsts(z):
        branch = branches.get(z, [])
        first_plus = next((j for j in branch if sgn[j] == PLUS), None)
        first_minus = next((j for j in branch if sgn[j] == MINUS), None)
        return first_plus, first_minus

    nodes = {}
    p, m = firsts(1)
    nodes[1] = DNode(1, None, {"r+": slot(p, False), "r-": slot(m, True)})
    for j in range(2, k + 1):
        s = sgn[j]
        branch = branches[pair.mu[j]]
        later = branch[branch.index(j) + 1:]
        ls = next((x for x in later if sgn[x] == s), None)
        p, m = firsts(j)
        nodes[j] = DNode(j, s, {
            "ls": slot(ls, False),
            "r+": slot(p, s == MINUS),
            "r-": slot(m, s == PLUS),
        })
    return DTree(pair, nodes)


def build_dtree(ref: Pair) -> DTree:
    """D-tree of a reference pair.

    For reference pairs the ``ls`` slot is exactly the same-sign left child
    in the tree, since each branch lists its ``+`` block before its ``-``
    block.
    """
    from kmgame.moves import is_reference

    if not is_reference(ref):
        raise NotReference(f"not a reference pair: {ref}")
    return factor_tree(ref)


# ---------------------------------------------------------------------------
# markings


@dataclass(frozen=True)
class CouplingMarking:
    """Per-node flags and the unclogged count.

    ``contracts_phi[j]``: ``D^(j)`` has an ``F`` slot.
    ``contracts_rough[j]``: a slot of ``D^(j)`` holds ``C^(k+1)`` or a rough node.
    ``unclogged``: couplings ``l < k`` whose node ``D^(l+1)`` has an ``F`` slot.
    ``leftover``: ``D^(1)`` itself holds an ``F``, which happens exactly when
    the branch under the root is single-signed.
    """

    contracts_phi: dict
    contracts_rough: dict
    unclogged: tuple
    leftover: bool

    @property
    def unclogged_count(self) -> int:
        return len(self.unclogged)

    def rough_path(self) -> list:
        return sorted(j for j, v in self.contracts_rough.items() if v)


def unclogged_lower_bound(k: int) -> int:
    """``ceil(2(k-1)/3)``."""
    return math.ceil(2 * (k - 1) / 3)


def mark_couplings(d: DTree) -> CouplingMarking:
    k = d.k
    phi = {j: any(s.kind == "F" for s in n.children()) for j, n in d.nodes.items()}
    rough: dict = {}

    def is_rough(j):
        if j not in rough:
            rough[j] = any(
                s.kind == "C" or (s.kind == "D" and is_rough(s.label))
                for s in d.nodes[j].children()
            )
        return rough[j]

    for j in d.nodes:
        is_rough(j)
    unclogged = tuple(l for l in range(1, k) if phi[l + 1])
    return CouplingMarking(phi, dict(sorted(rough.items())), unclogged, phi[1])


# ---------------------------------------------------------------------------
# expressions


class FTerm(NamedTuple):
    time: int  # always k+1

    def to_json(self):
        return {"kind": "F", "time": self.time}


class CTerm(NamedTuple):
    label: int

    def to_json(self):
        return {"kind": "C", "label": self.label}


class DTerm(NamedTuple):
    """``U(-t_j)[...]`` with its own integral ``limit`` (None for the root)."""

    label: int
    sign: Optional[str]
    limit: Optional[Limit]
    factors: tuple  # (slot name, conj, term)

    def to_json(self):
        out = {"kind": "D", "label": self.label, "sign": self.sign}
        if self.limit is not None:
            out["limit"] = _limit_json(self.limit)
        out["factors"] = [
            {"slot": s, "conj": c, "term": t.to_json()} for s, c, t in self.factors
        ]
        return out


def _limit_json(lim: Limit) -> dict:
    return {"var": lim.var, "lower": lim.lower, "upper": lim.upper}


@dataclass(frozen=True)
class DuhamelExpression:
    """``gamma^(1)(t_1) = int_{outer} U_1 D^(1)`` in factorized form."""

    k: int
    outer: Limit
    root: DTerm

    def bound_variables(self) -> list:
        out = [self.outer.var]

        def walk(t):
            if isinstance(t, DTerm):
                if t.limit is not None:
                    out.append(t.limit.var)
                for _, _, c in t.factors:
                    walk(c)

        walk(self.root)
        return out

    def limits(self) -> list:
        out = [self.outer]

        def walk(t):
            if isinstance(t, DTerm):
                if t.limit is not None:
                    out.append(t.limit)
                for _, _, c in t.factors:
                    walk(c)

        walk(self.root)
        return out

    def to_json(self) -> dict:
        return {"k": self.k, "outer": _limit_json(self.outer), "root": self.root.to_json()}

    def render(self) -> str:
        return f"int_{_bounds(self.outer)} " + _render_term(self.root)


def _bounds(lim: Limit) -> str:
    lo = "0" if lim.lower is None else f"t{lim.lower}"
    return f"{{t{lim.var}={lo}}}^{{t{lim.upper}}}"


def _render_term(t) -> str:
    if isinstance(t, FTerm):
        return f"F(t{t.time})"
    if isinstance(t, CTerm):
        return f"C{t.label}"
    parts = []
    for _, conj, child in t.factors:
        inner = _render_term(child)
        if isinstance(child, DTerm):
            inner = f"int_{_bounds(child.limit)} {inner}"
        factor = f"U{t.label}[{inner}]"
        parts.append(f"conj({factor})" if conj else factor)
    sep = " * "
    if t.limit is None:
        return sep.join(parts)
    return f"D{t.label}(U(-t{t.label})[{sep.join(parts)}])"


def duhamel_expression(d: DTree, dom: Optional[DomainPoset] = None, mode: str = "exact") -> DuhamelExpression:
    """Nested expression whose integration bounds come from ``iterated_limits``.

    Each ``D^(j)`` integral sits directly inside its D-tree parent, so
    sibling integrals share only their parent's time and the outermost
    ``t_{k+1}``.

    Raises
    ------
    DomainError
        If some variable's upper bound is not its D-tree parent.
    """
    k = d.k
    dom = dom or reference_domain(d.pair, check=False)
    limits = iterated_limits(dom, k + 1, mode)
    by_var = {lim.var: lim for lim in limits[1:]}
    for j, lim in by_var.items():
        if lim.upper != d.parent(j):
            raise DomainError(f"t{j} is bounded by t{lim.upper}, not by its D-tree parent")

    def term(slot):
        if slot.kind == "F":
            return FTerm(k + 1)
        if slot.kind == "C":
            return CTerm(slot.label)
        return build(slot.label)

    def build(j):
        node = d.nodes[j]
        factors = tuple(
            (name, node.slots[name].conj, term(node.slots[name]))
            for name in SLOTS if name in node.slots
        )
        return DTerm(j, node.sign, by_var.get(j), factors)

    return DuhamelExpression(k, limits[0], build(1))


def factorization_failures(pair: Pair, dom: Optional[DomainPoset] = None) -> list:
    """Covers ``(p, c)`` of the domain where ``t_c`` is bounded by a time that
    is not a factor-tree ancestor of ``c`` (``t_{k+1}`` excepted)."""
    if dom is None:
        from kmgame.moves import is_reference

        dom = reference_domain(pair) if is_reference(pair) else upper_echelon_domain(pair.mu)
    tree = factor_tree(pair)
    bad = []
    for p, c in dom.sorted_covers():
        if c == pair.k + 1:
            continue
        if p not in tree.ancestors(c):
            bad.append((p, c))
    return bad


def check_factorization(pair: Pair, dom: Optional[DomainPoset] = None) -> bool:
    """True iff every integral is bounded only by enclosing factors' times.

    With ``dom`` omitted, reference pairs are checked against ``T_R`` and any
    other pair against its raw ``T_D``.
    """
    return not factorization_failures(pair, dom)


# ---------------------------------------------------------------------------
# rendering


def dtree_to_text(d: DTree) -> str:
    lines = []
    for j in sorted(d.nodes):
        node = d.nodes[j]
        tag = f"D{j}" + (node.sign or "")
        parts = [f"{name} {node.slots[name].name()}" for name in SLOTS if name in node.slots]
        lines.append(f"{tag}: " + ", ".join(parts))
    return "\n".join(lines) + "\n"


def dtree_to_dot(d: DTree, name: str = "dtree") -> str:
    """DOT text with ``ls`` / ``r+`` / ``r-`` edge labels; each ``F`` is its own leaf."""
    lines = [f"digraph {name} {{", "  node [shape=box];"]
    for j in sorted(d.nodes):
        lines.append(f'  D{j} [label="D{j}"];')
    lines.append(f'  C{d.k + 1} [label="C{d.k + 1}", shape=doublecircle];')
    for j in sorted(d.nodes):
        for slot_name in SLOTS:
            slot = d.nodes[j].slots.get(slot_name)
            if slot is None:
                continue
            if slot.kind == "F":
                leaf = f"F_{j}_{SLOTS.index(slot_name)}"
                lines.append(f'  {leaf} [label="F", shape=plaintext];')
                target = leaf
            else:
                target = slot.name()
            style = ', style=dashed' if slot.conj else ''
            lines.append(f'  D{j} -> {target} [label="{slot_name}"{style}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def dtree_to_json(d: DTree) -> dict:
    return {
        "k": d.k,
        "mu": list(d.pair.mu.values),
        "sgn": list(d.pair.sgn.signs),
        "nodes": [
            {
                "label": j,
                "sign": d.nodes[j].sign,
                "slots": {
                    name: {"kind": s.kind, "label": s.label, "conj": s.conj}
                    for name, s in d.nodes[j].slots.items()
                },
            }
            for j in sorted(d.nodes)
        ],
    }
