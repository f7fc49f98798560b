"""Collapsing maps, signed trees, skeletons and their canonical labelings.

A collapsing map ``mu`` on ``{2, ..., k+1}`` records, for each coupling, the
particle it collapses onto.  Admissible maps satisfy ``mu(2) = 1`` and
``mu(j) < j``.  Each admissible map is encoded by a binary tree whose root is
node 1: the left child of ``j`` is the next label sharing ``mu(j)``, the right
child the next label mapping to ``j``.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple, Optional, Sequence

from kmgame.errors import InadmissibleTree, InvalidCollapseMap, InvalidSignMap

PLUS = "+"
MINUS = "-"

_SIGN_ALIASES = {
    "+": PLUS, "plus": PLUS, "p": PLUS, 1: PLUS,
    "-": MINUS, "−": MINUS, "minus": MINUS, "m": MINUS, -1: MINUS,
}


def parse_sign(value) -> str:
    try:
        return _SIGN_ALIASES[value.lower() if isinstance(value, str) else value]
    except (KeyError, TypeError):
        raise InvalidSignMap(f"not a sign: {value!r}") from None


def validate_collapse_map(values) -> bool:
    """True iff ``values`` (``mu(2), ..., mu(k+1)``) is an admissible map."""
    if isinstance(values, CollapseMap):
        values = values.values
    try:
        vals = [int(v) for v in values]
    except (TypeError, ValueError):
        return False
    if not vals or vals[0] != 1:
        return False
    return all(1 <= v < j for j, v in enumerate(vals, start=2))


@dataclass(frozen=True, order=True)
class CollapseMap:
    """Admissible collapsing map, stored densely from label 2."""

    values: tuple

    def __post_init__(self):
        try:
            vals = tuple(int(v) for v in self.values)
        except (TypeError, ValueError):
            raise InvalidCollapseMap(f"collapsing map entries must be integers: {self.values!r}") from None
        if not validate_collapse_map(vals):
            raise InvalidCollapseMap(f"inadmissible collapsing map {vals}")
        object.__setattr__(self, "values", vals)

    @property
    def k(self) -> int:
        return len(self.values)

    def __getitem__(self, j: int) -> int:
        if not 2 <= j <= self.k + 1:
            raise IndexError(f"label {j} outside 2..{self.k + 1}")
        return self.values[j - 2]

    def __iter__(self):
        return iter(self.values)

    def __len__(self):
        return len(self.values)

    def labels(self) -> range:
        return range(2, self.k + 2)

    def __str__(self):
        return "(" + ",".join(map(str, self.values)) + ")"


@dataclass(frozen=True, order=True)
class SignMap:
    """Signs ``sgn(2), ..., sgn(k+1)``, each ``"+"`` or ``"-"``."""

    signs: tuple

    def __post_init__(self):
        object.__setattr__(self, "signs", tuple(parse_sign(s) for s in self.signs))

    @classmethod
    def from_string(cls, text: str) -> "SignMap":
        return cls(tuple(c for c in text if not c.isspace() and c != ","))

    @classmethod
    def all_plus(cls, k: int) -> "SignMap":
        return cls((PLUS,) * k)

    @property
    def k(self) -> int:
        return len(self.signs)

    def __getitem__(self, j: int) -> str:
        if not 2 <= j <= self.k + 1:
            raise IndexError(f"label {j} outside 2..{self.k + 1}")
        return self.signs[j - 2]

    def __iter__(self):
        return iter(self.signs)

    def __len__(self):
        return len(self.signs)

    def as_ints(self) -> tuple:
        return tuple(1 if s == PLUS else -1 for s in self.signs)

    def __str__(self):
        return "".join(self.signs)


class Pair(NamedTuple):
    """A collapsing map together with its sign map."""

    mu: CollapseMap
    sgn: SignMap

    @property
    def k(self) -> int:
        return self.mu.k

    def key(self):
        return (self.mu.values, self.sgn.signs)

    def __str__(self):
        return f"mu={self.mu} sgn={self.sgn}"


def make_pair(mu, sgn) -> Pair:
    """Build a :class:`Pair` from plain sequences or strings, checking ``k``."""
    m = mu if isinstance(mu, CollapseMap) else CollapseMap(tuple(mu))
    if isinstance(sgn, SignMap):
        s = sgn
    elif isinstance(sgn, str):
        s = SignMap.from_string(sgn)
    else:
        s = SignMap(tuple(sgn))
    if s.k != m.k:
        raise InvalidSignMap(f"sign map has k={s.k}, collapsing map has k={m.k}")
    return Pair(m, s)


@dataclass(frozen=True, order=True)
class TimePermutation:
    """Bijection of ``{2, ..., k+1}``; ``images[i]`` is the image of ``i + 2``.

    Label 1 is always fixed.  ``a * b`` is the composition ``a o b``.
    """

    images: tuple

    def __post_init__(self):
        imgs = tuple(int(v) for v in self.images)
        if sorted(imgs) != list(range(2, len(imgs) + 2)):
            raise ValueError(f"not a permutation of 2..{len(imgs) + 1}: {imgs}")
        object.__setattr__(self, "images", imgs)

    @classmethod
    def identity(cls, k: int) -> "TimePermutation":
        return cls(tuple(range(2, k + 2)))

    @classmethod
    def transposition(cls, k: int, a: int, b: int) -> "TimePermutation":
        imgs = list(range(2, k + 2))
        imgs[a - 2], imgs[b - 2] = b, a
        return cls(tuple(imgs))

    @classmethod
    def from_mapping(cls, k: int, mapping) -> "TimePermutation":
        """Permutation agreeing with ``mapping`` where given, identity elsewhere."""
        return cls(tuple(mapping.get(j, j) for j in range(2, k + 2)))

    @property
    def k(self) -> int:
        return len(self.images)

    def __call__(self, j: int) -> int:
        return 1 if j == 1 else self.images[j - 2]

    def __mul__(self, other: "TimePermutation") -> "TimePermutation":
        if other.k != self.k:
            raise ValueError("composing permutations of different size")
        return TimePermutation(tuple(self(other(j)) for j in range(2, self.k + 2)))

    def inverse(self) -> "TimePermutation":
        inv = [0] * self.k
        for i, v in enumerate(self.images):
            inv[v - 2] = i + 2
        return TimePermutation(tuple(inv))

    def is_identity(self) -> bool:
        return self.images == tuple(range(2, self.k + 2))

    def __str__(self):
        return "(" + ",".join(map(str, self.images)) + ")"


def enumerate_collapse_maps(k: int) -> list:
    """All ``k!`` admissible collapsing maps in lexicographic order."""
    if k < 1:
        raise ValueError("coupling order k must be at least 1")
    ranges = [range(1, j) for j in range(2, k + 2)]
    return [CollapseMap(v) for v in itertools.product(*ranges)]


def enumerate_sign_maps(k: int) -> list:
    return [SignMap(s) for s in itertools.product((PLUS, MINUS), repeat=k)]


def enumerate_pairs(k: int) -> list:
    """All ``2^k k!`` signed pairs, ordered by map then by sign array."""
    signs = enumerate_sign_maps(k)
    return [Pair(m, s) for m in enumerate_collapse_maps(k) for s in signs]


def tier(mu: CollapseMap, j: int) -> int:
    """Number of applications of ``mu`` needed to reach 1 from ``j``."""
    if not 2 <= j <= mu.k + 1:
        raise IndexError(f"label {j} outside 2..{mu.k + 1}")
    q = 0
    while j != 1:
        j = mu[j]
        q += 1
    return q


def is_upper_echelon(mu: CollapseMap) -> bool:
    v = mu.values
    return all(a <= b for a, b in zip(v, v[1:]))


# ---------------------------------------------------------------------------
# trees


@dataclass(frozen=True)
class SignedTree:
    """Admissible binary tree on labels ``1..k+1``.

    ``left[j]`` / ``right[j]`` hold the child labels of ``j`` (``None`` when
    absent); both tuples are indexed by label, slot 0 unused.
    """

    k: int
    left: tuple
    right: tuple
    signs: Optional[tuple] = None

    def __post_init__(self):
        n = self.k + 2
        if len(self.left) != n or len(self.right) != n:
            raise InadmissibleTree("child tables must be indexed 0..k+1")
        if self.signs is not None and len(self.signs) != n:
            raise InadmissibleTree("sign table must be indexed 0..k+1")
        problem = _tree_problem(self)
        if problem:
            raise InadmissibleTree(problem)

    @classmethod
    def from_edges(cls, k: int, edges: Iterable, signs=None) -> "SignedTree":
        """Build from ``(parent, child, side)`` triples, side ``"L"`` or ``"R"``.

        ``signs`` maps label to sign for labels ``2..k+1`` (dict or sequence
        starting at label 2).
        """
        left = [None] * (k + 2)
        right = [None] * (k + 2)
        for parent, child, side in edges:
            if not (1 <= parent <= k + 1 and 1 <= child <= k + 1):
                raise InadmissibleTree(f"edge {parent}->{child} outside labels 1..{k + 1}")
            table = left if side.upper() == "L" else right
            if table[parent] is not None:
                raise InadmissibleTree(f"node {parent} has two {side} children")
            table[parent] = child
        sign_table = None
        if signs is not None:
            if not isinstance(signs, dict):
                signs = {j: s for j, s in enumerate(signs, start=2)}
            sign_table = tuple(
                [None, None] + [parse_sign(signs[j]) for j in range(2, k + 2)]
            )
        return cls(k, tuple(left), tuple(right), sign_table)

    def sign(self, j: int) -> Optional[str]:
        return None if self.signs is None else self.signs[j]

    def children(self, j: int) -> tuple:
        return tuple(c for c in (self.left[j], self.right[j]) if c is not None)

    def edges(self) -> list:
        """``(parent, child, side)`` triples, left edge before right edge."""
        out = []
        for j in range(1, self.k + 2):
            if self.left[j] is not None:
                out.append((j, self.left[j], "L"))
            if self.right[j] is not None:
                out.append((j, self.right[j], "R"))
        return out

    def parent(self, j: int) -> Optional[int]:
        for p, c, _ in self.edges():
            if c == j:
                return p
        return None

    def left_branch(self, start: int) -> list:
        """Labels down the left spine starting at ``start``."""
        out = []
        node = start
        while node is not None:
            out.append(node)
            node = self.left[node]
        return out

    def skeleton(self, signed: bool = True) -> "Skeleton":
        def build(j):
            if j is None:
                return None
            s = self.sign(j) if signed else None
            return Node(s, build(self.left[j]), build(self.right[j]))

        return Skeleton(build(self.right[1]))


def _tree_problem(t: SignedTree) -> Optional[str]:
    k = t.k
    if t.left[1] is not None:
        return "node 1 must not have a left child"
    if t.right[1] != 2:
        return "node 2 must be the right child of node 1"
    seen = {1}
    stack = [1]
    while stack:
        j = stack.pop()
        for c in (t.left[j], t.right[j]):
            if c is None:
                continue
            if c <= j:
                return f"child {c} is not larger than its parent {j}"
            if c in seen:
                return f"label {c} appears twice"
            seen.add(c)
            stack.append(c)
    if seen != set(range(1, k + 2)):
        return f"tree does not reach every label 1..{k + 1}"
    if t.signs is not None:
        for j in range(2, k + 2):
            if t.signs[j] not in (PLUS, MINUS):
                return f"node {j} has no sign"
    return None


def mu_to_tree(mu: CollapseMap, sgn: Optional[SignMap] = None) -> SignedTree:
    """Tree of ``mu``: minimal later label with the same value goes left,
    minimal later label mapping to ``j`` goes right."""
    if not isinstance(mu, CollapseMap):
        mu = CollapseMap(tuple(mu))
    if sgn is not None and sgn.k != mu.k:
        raise InvalidSignMap("sign map and collapsing map disagree on k")
    k = mu.k
    left = [None] * (k + 2)
    right = [None] * (k + 2)
    right[1] = 2
    for j in range(2, k + 2):
        for a in range(j + 1, k + 2):
            if mu[a] == mu[j]:
                left[j] = a
                break
        for b in range(j + 1, k + 2):
            if mu[b] == j:
                right[j] = b
                break
    signs = None if sgn is None else tuple([None, None] + list(sgn.signs))
    return SignedTree(k, tuple(left), tuple(right), signs)


def tree_to_mu(tree: SignedTree):
    """Inverse of :func:`mu_to_tree`; returns ``(mu, sgn)`` (``sgn`` may be None)."""
    k = tree.k
    mu = [None] * (k + 2)
    for parent, child, side in tree.edges():
        if side == "R":
            mu[child] = parent
    # left children inherit their parent's value; parents precede children
    for j in range(2, k + 2):
        c = tree.left[j]
        if c is not None:
            mu[c] = mu[j]
    m = CollapseMap(tuple(mu[2:]))
    s = None if tree.signs is None else SignMap(tuple(tree.signs[2:]))
    return m, s


# ---------------------------------------------------------------------------
# skeletons


class Node(NamedTuple):
    sign: Optional[str]
    left: Optional["Node"]
    right: Optional["Node"]


def _encode(node: Optional[Node]) -> str:
    if node is None:
        return "."
    return f"{node.sign or ''}(L{_encode(node.left)}R{_encode(node.right)})"


def _count(node: Optional[Node]) -> int:
    return 0 if node is None else 1 + _count(node.left) + _count(node.right)


@dataclass(frozen=True)
class Skeleton:
    """Unlabeled tree below node 1 (``root`` is the node that holds label 2).

    Equality is structural; :meth:`code` is a pre-order string with ``L``/``R``
    markers used as a hash key.
    """

    root: Node

    @property
    def k(self) -> int:
        return _count(self.root)

    @property
    def signed(self) -> bool:
        return self.root is not None and self.root.sign is not None

    def code(self) -> str:
        return _encode(self.root)

    def unsigned(self) -> "Skeleton":
        def strip(n):
            return None if n is None else Node(None, strip(n.left), strip(n.right))

        return Skeleton(strip(self.root))

    def with_signs(self, signs: Sequence[str]) -> "Skeleton":
        """Attach signs in pre-order (node, left subtree, right subtree)."""
        it = iter(signs)

        def put(n):
            if n is None:
                return None
            s = parse_sign(next(it))
            return Node(s, put(n.left), put(n.right))

        out = Skeleton(put(self.root))
        if next(it, None) is not None:
            raise InvalidSignMap("more signs than skeleton nodes")
        return out

    def paths(self) -> dict:
        """Map from path (tuple of ``"L"``/``"R"``) to node, pre-order."""
        out = {}

        def walk(n, path):
            if n is None:
                return
            out[path] = n
            walk(n.left, path + ("L",))
            walk(n.right, path + ("R",))

        walk(self.root, ())
        return out

    def __str__(self):
        return self.code()


def _shapes(n: int) -> Iterator[Optional[Node]]:
    if n == 0:
        yield None
        return
    for i in range(n):
        for left in _shapes(i):
            for right in _shapes(n - 1 - i):
                yield Node(None, left, right)


def enumerate_skeletons(k: int) -> list:
    """All bare skeletons with ``k`` nodes, sorted by :meth:`Skeleton.code`."""
    if k < 1:
        raise ValueError("coupling order k must be at least 1")
    return sorted((Skeleton(r) for r in _shapes(k)), key=Skeleton.code)


def enumerate_signed_skeletons(k: int) -> list:
    out = []
    for sk in enumerate_skeletons(k):
        for signs in itertools.product((PLUS, MINUS), repeat=k):
            out.append(sk.with_signs(signs))
    return out


def catalan(n: int) -> int:
    return math.comb(2 * n, n) // (n + 1)


def _labeled_to_pair(skeleton: Skeleton, labels: dict):
    k = skeleton.k
    nodes = skeleton.paths()
    edges = [(1, labels[()], "R")]
    signs = {}
    for path, node in nodes.items():
        j = labels[path]
        if node.sign is not None:
            signs[j] = node.sign
        if node.left is not None:
            edges.append((j, labels[path + ("L",)], "L"))
        if node.right is not None:
            edges.append((j, labels[path + ("R",)], "R"))
    tree = SignedTree.from_edges(k, edges, signs if skeleton.signed else None)
    return tree_to_mu(tree)


def upper_echelon_labeling(skeleton: Skeleton) -> CollapseMap:
    """Label the top node 2, then repeatedly label the left child of the
    newest node, or else the empty right child of the smallest labeled node."""
    nodes = skeleton.paths()
    k = len(nodes)
    labels = {(): 2}
    by_label = {2: ()}
    j = 2
    while j < k + 1:
        path = by_label[j]
        if nodes[path].left is not None:
            nxt = path + ("L",)
        else:
            nxt = None
            for lab in sorted(by_label):
                p = by_label[lab]
                if nodes[p].right is not None and p + ("R",) not in labels:
                    nxt = p + ("R",)
                    break
            if nxt is None:
                break
        j += 1
        labels[nxt] = j
        by_label[j] = nxt
    mu, _ = _labeled_to_pair(skeleton.unsigned(), labels)
    return mu


def tamed_labeling(skeleton: Skeleton) -> Pair:
    """Queue enumeration of a signed skeleton: each dequeued node's right-child
    left branch is labeled top-down, then its ``+`` nodes are enqueued before
    its ``-`` nodes."""
    if not skeleton.signed:
        raise InvalidSignMap("tamed labeling needs a signed skeleton")
    nodes = skeleton.paths()
    labels = {}
    queue = deque([None])  # None stands for node 1
    j = 2
    while queue:
        path = queue.popleft()
        if path is None:
            start = ()
        else:
            if nodes[path].right is None:
                continue
            start = path + ("R",)
        branch = []
        p = start
        while p in nodes:
            labels[p] = j
            branch.append(p)
            j += 1
            p = p + ("L",)
        queue.extend(b for b in branch if nodes[b].sign == PLUS)
        queue.extend(b for b in branch if nodes[b].sign == MINUS)
    mu, sgn = _labeled_to_pair(skeleton, labels)
    return Pair(mu, sgn)


def signed_skeleton(pair: Pair) -> Skeleton:
    return mu_to_tree(pair.mu, pair.sgn).skeleton(signed=True)


def bare_skeleton(mu: CollapseMap) -> Skeleton:
    return mu_to_tree(mu).skeleton(signed=False)


def is_tamed(mu: CollapseMap, sgn: SignMap) -> bool:
    """Check the four tier / parent-sign ordering rules of the tamed form.

    Comparisons that would read the sign or the ``mu`` value of node 1
    (tier-1 labels) are vacuous.
    """
    if sgn.k != mu.k:
        raise InvalidSignMap("sign map and collapsing map disagree on k")
    labels = list(mu.labels())
    t = {j: tier(mu, j) for j in labels}
    for ell in labels:
        for r in labels:
            if ell == r:
                continue
            if t[ell] < t[r]:
                if not ell < r:
                    return False
                continue
            if t[ell] != t[r] or t[ell] == 1:
                continue
            pl, pr = mu[ell], mu[r]
            same_branch = _mu(mu, pl) == _mu(mu, pr)
            sl, sr = sgn[pl], sgn[pr]
            if same_branch and sl == sr and pl < pr and not ell < r:
                return False
            if same_branch and sl == PLUS and sr == MINUS and not ell < r:
                return False
            if not same_branch and pl < pr and not ell < r:
                return False
    return True


def _mu(mu: CollapseMap, j: int) -> Optional[int]:
    return None if j == 1 else mu[j]


def left_branches(mu: CollapseMap) -> dict:
    """Map ``z -> [labels j with mu(j) = z]`` in increasing order.

    In tree terms this is the full left branch hanging from the right child
    of ``z``.
    """
    out: dict = {}
    for j in mu.labels():
        out.setdefault(mu[j], []).append(j)
    return out


# ---------------------------------------------------------------------------
# serialization and rendering


def pair_to_json(pair: Pair) -> dict:
    tree = mu_to_tree(pair.mu, pair.sgn)
    return {
        "k": pair.k,
        "mu": list(pair.mu.values),
        "sgn": list(pair.sgn.signs),
        "edges": [[p, c, side] for p, c, side in tree.edges()],
    }


def map_to_json(mu: CollapseMap) -> dict:
    tree = mu_to_tree(mu)
    return {
        "k": mu.k,
        "mu": list(mu.values),
        "edges": [[p, c, side] for p, c, side in tree.edges()],
    }


def pair_from_json(data: dict) -> Pair:
    pair = make_pair(data["mu"], data["sgn"])
    if "k" in data and int(data["k"]) != pair.k:
        raise InvalidCollapseMap(f"k={data['k']} does not match {len(data['mu'])} entries")
    if "edges" in data:
        tree = SignedTree.from_edges(pair.k, data["edges"], pair.sgn.signs)
        if tree_to_mu(tree) != (pair.mu, pair.sgn):
            raise InadmissibleTree("edges disagree with mu/sgn")
    return pair


def tree_to_dot(tree: SignedTree, name: str = "tree") -> str:
    """DOT text; node labels ``j+``/``j-`` (root ``1``), left edges first."""
    lines = [f"digraph {name} {{", "  node [shape=circle];"]
    for j in range(1, tree.k + 2):
        label = str(j) if j == 1 else f"{j}{tree.sign(j) or ''}"
        lines.append(f'  n{j} [label="{label}"];')
    for p, c, side in tree.edges():
        lines.append(f'  n{p} -> n{c} [label="{side}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def tree_to_text(tree: SignedTree) -> str:
    """Indented outline, one node per line, left child before right child."""
    out = []

    def walk(j, depth, tag):
        label = str(j) if j == 1 else f"{j}{tree.sign(j) or ''}"
        out.append("  " * depth + (f"{tag} " if tag else "") + label)
        if tree.left[j] is not None:
            walk(tree.left[j], depth + 1, "L")
        if tree.right[j] is not None:
            walk(tree.right[j], depth + 1, "R")

    walk(1, 0, "")
    return "\n".join(out) + "\n"
