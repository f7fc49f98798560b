"""Periodic one-dimensional lattice model of the hierarchy operators.

Kernels of ``m`` particles are complex arrays with ``2m`` axes of length
``N``, ordered ``(x_1, ..., x_m, x'_1, ..., x'_m)``.  The free flow applies
``e^{it Delta}`` on unprimed axes and ``e^{-it Delta}`` on primed axes; the
collapsing operator ``B^+_{j,m}`` (``B^-_{j,m}``) sets ``x_m = x'_m = x_j``
(``= x'_j``) and drops particle ``m``.  The lattice delta is the Kronecker
delta, the coupling constant and the ``-i`` prefactors are 1.

The identities checked here use only unitarity, locality of ``B`` and
symmetry of the density, so one dimension is enough.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from kmgame.core import MINUS, PLUS, CollapseMap, Pair, SignMap, TimePermutation, make_pair
from kmgame.domains import DomainPoset, domain_indicator, reference_domain, simplex_domain
from kmgame.dtree import DTree, factor_tree
from kmgame.errors import KernelShapeError, ResourceLimitError, SymmetryError

DEFAULT_SEED = 20240611
MAX_QUADRATURE_K = 3


class LatticeModel:
    """Periodic second difference on ``N`` sites and its unitary flow.

    Parameters
    ----------
    N : int
        Number of lattice sites, at least 2.
    """

    def __init__(self, N: int):
        if N < 2:
            raise ValueError("lattice size N must be at least 2")
        self.N = N
        lap = np.zeros((N, N))
        for x in range(N):
            lap[x, x] -= 2.0
            lap[x, (x + 1) % N] += 1.0
            lap[x, (x - 1) % N] += 1.0
        self.laplacian = lap
        self.eigenvalues, self.eigenvectors = np.linalg.eigh(lap)
        self._cache: dict = {}

    def propagator(self, t: float) -> np.ndarray:
        """``e^{it Delta}`` through the spectral decomposition."""
        key = float(t)
        U = self._cache.get(key)
        if U is None:
            V = self.eigenvectors
            U = (V * np.exp(1j * key * self.eigenvalues)) @ V.T
            if len(self._cache) < 4096:
                self._cache[key] = U
        return U

    def check(self, tol: float = 1e-12, seed: int = DEFAULT_SEED) -> float:
        """Worst violation of ``U(0) = I``, unitarity and the group law."""
        rng = np.random.default_rng(seed)
        s, t = rng.uniform(-3, 3, size=2)
        eye = np.eye(self.N)
        errs = [
            np.abs(self.propagator(0.0) - eye).max(),
            np.abs(self.propagator(t).conj().T @ self.propagator(t) - eye).max(),
            np.abs(self.propagator(s) @ self.propagator(t) - self.propagator(s + t)).max(),
        ]
        return float(max(errs))


def make_model(N: int) -> LatticeModel:
    return LatticeModel(N)


@dataclass
class KernelTensor:
    """Kernel ``gamma(x_1..x_m; x'_1..x'_m)`` on the lattice."""

    m: int
    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=complex)
        if self.data.ndim != 2 * self.m or len(set(self.data.shape)) > 1:
            raise KernelShapeError(f"expected {2 * self.m} equal axes, got shape {self.data.shape}")

    @property
    def N(self) -> int:
        return self.data.shape[0]

    def trace(self) -> complex:
        N, m = self.N, self.m
        mat = self.data.reshape(N ** m, N ** m)
        return complex(np.trace(mat))

    def __add__(self, other):
        return KernelTensor(self.m, self.data + other.data)

    def __rmul__(self, c):
        return KernelTensor(self.m, c * self.data)


def _apply_matrix(A: np.ndarray, g: np.ndarray, axis: int) -> np.ndarray:
    return np.moveaxis(np.tensordot(A, g, axes=(1, axis)), 0, axis)


def apply_free(model: LatticeModel, count: int, t: float, g: KernelTensor) -> KernelTensor:
    """``e^{it Delta}`` on ``x_1..x_count`` and ``e^{-it Delta}`` on ``x'_1..x'_count``."""
    if g.N != model.N:
        raise KernelShapeError("kernel and model use different lattice sizes")
    if not 0 <= count <= g.m:
        raise KernelShapeError(f"count={count} exceeds particle number {g.m}")
    if t == 0:
        return g
    U = model.propagator(t)
    Uc = U.conj()
    data = g.data
    for i in range(count):
        data = _apply_matrix(U, data, i)
        data = _apply_matrix(Uc, data, g.m + i)
    return KernelTensor(g.m, data)


def apply_collapse(j: int, m: int, sign: str, g: KernelTensor) -> KernelTensor:
    """``B^sign_{j,m}``: put ``x_j`` (plus) or ``x'_j`` (minus) into both slots
    of particle ``m = g.m`` and remove it."""
    if m != g.m:
        raise KernelShapeError(f"collapse onto particle {m} of a {g.m}-particle kernel")
    if not 1 <= j < m:
        raise KernelShapeError(f"collapse index j={j} outside 1..{m - 1}")
    n = m - 1
    xs = list(range(n))
    xps = list(range(n, 2 * n))
    a = xs[j - 1] if sign == PLUS else xps[j - 1]
    data = np.einsum(g.data, xs + [a] + xps + [a], xs + xps)
    return KernelTensor(n, data)


def eval_J(model: LatticeModel, mu: CollapseMap, sgn: SignMap, t1: float,
           times: Sequence[float], f: KernelTensor, evolve: bool = False) -> KernelTensor:
    """``U(t_1-t_2) B_{1,2} U(t_2-t_3) ... U(t_k-t_{k+1}) B_{mu(k+1),k+1} f``.

    ``times`` holds ``t_2, ..., t_{k+1}``.  With ``evolve`` the density is
    taken along its free path, ``f(t_{k+1}) = U^{(k+1)}(t_{k+1}) f``, so that
    permuting the times also moves the density's time argument.
    """
    k = mu.k
    if sgn.k != k or len(times) != k:
        raise KernelShapeError("mu, sgn and times must share k")
    if f.m != k + 1:
        raise KernelShapeError(f"J needs a {k + 1}-particle kernel, got {f.m}")
    t = (t1,) + tuple(times)  # t[i] is t_{i+1}
    g = apply_free(model, k + 1, t[k], f) if evolve else f
    for j in range(k + 1, 1, -1):
        g = apply_collapse(mu[j], j, sgn[j], g)
        g = apply_free(model, j - 1, t[j - 2] - t[j - 1], g)
    return g


def reorder_times(sigma: TimePermutation, times: Sequence[float]) -> tuple:
    """``sigma^{-1}(t)``: the entry for label ``j`` is ``t_{sigma^{-1}(j)}``."""
    inv = sigma.inverse()
    return tuple(times[inv(j) - 2] for j in range(2, sigma.k + 2))


def relative_residual(lhs: np.ndarray, rhs: np.ndarray) -> float:
    scale = np.abs(lhs).max()
    diff = np.abs(lhs - rhs).max()
    return float(diff / scale) if scale > 0 else float(diff)


# ---------------------------------------------------------------------------
# densities


@dataclass
class ProductMixture:
    """``sum_a c_a |phi_a><phi_a|^{(x) m}`` kept in factored form."""

    m: int
    phis: np.ndarray  # (components, N)
    coefs: np.ndarray  # (components,)

    def tensor(self) -> KernelTensor:
        N = self.phis.shape[1]
        data = np.zeros((N,) * (2 * self.m), dtype=complex)
        for c, phi in zip(self.coefs, self.phis):
            factors = [phi] * self.m + [phi.conj()] * self.m
            data += c * _outer(factors)
        return KernelTensor(self.m, data)


def _outer(vectors) -> np.ndarray:
    out = np.asarray(vectors[0])
    for v in vectors[1:]:
        out = np.multiply.outer(out, v)
    return out


def random_unit_vector(rng: np.random.Generator, N: int) -> np.ndarray:
    v = rng.normal(size=N) + 1j * rng.normal(size=N)
    return v / np.linalg.norm(v)


def random_mixture(rng: np.random.Generator, N: int, m: int, components: int = 3,
                   signed: bool = False) -> ProductMixture:
    """Random symmetric density; ``signed`` mimics a difference of two solutions."""
    phis = np.array([random_unit_vector(rng, N) for _ in range(components)])
    coefs = rng.uniform(0.2, 1.0, size=components)
    if signed:
        coefs[1::2] *= -1.0
    return ProductMixture(m, phis, coefs)


def non_symmetric_density(rng: np.random.Generator, N: int, m: int) -> KernelTensor:
    """``|phi_1><phi_1| (x) ... (x) |phi_m><phi_m|`` with distinct ``phi_i``:
    Hermitian but not invariant under particle exchange."""
    phis = [random_unit_vector(rng, N) for _ in range(m)]
    return KernelTensor(m, _outer(phis + [p.conj() for p in phis]))


def symmetry_residual(g: KernelTensor) -> float:
    """Largest violation of Hermitian and exchange symmetry, relative to ``max|g|``."""
    m = g.m
    d = g.data
    herm = np.transpose(d, list(range(m, 2 * m)) + list(range(m))).conj()
    worst = np.abs(d - herm).max()
    for i in range(m - 1):
        perm = list(range(2 * m))
        perm[i], perm[i + 1] = perm[i + 1], perm[i]
        perm[m + i], perm[m + i + 1] = perm[m + i + 1], perm[m + i]
        worst = max(worst, np.abs(d - np.transpose(d, perm)).max())
    scale = np.abs(d).max()
    return float(worst / scale) if scale > 0 else float(worst)


# ---------------------------------------------------------------------------
# identities


def check_km_identity(model: LatticeModel, pair: Pair, j: int, t1: float,
                      times: Sequence[float], f: KernelTensor, evolve: bool = True) -> float:
    """Relative residual of the move ``KM(j, j+1)`` identity at one time point.

    Compares ``J_{mu', sgn'}(t_1, sigma'^{-1} t)`` with ``J_{mu, sgn}(t_1, t)``
    where ``sigma' = (j, j+1)``.  The move ``KM(k, k+1)`` swaps ``t_{k+1}``
    into the density's time slot, so it only holds along the free path
    (``evolve=True``); with a frozen density it fails.
    """
    from kmgame.moves import SignedTriple, signed_km_move

    moved = signed_km_move(j, SignedTriple.from_pair(pair))
    lhs = eval_J(model, moved.mu, moved.sgn, t1, reorder_times(moved.sigma, times), f, evolve)
    rhs = eval_J(model, pair.mu, pair.sgn, t1, times, f, evolve)
    return relative_residual(lhs.data, rhs.data)


def check_move_identity(model: LatticeModel, source: Pair, target, t1: float,
                        times: Sequence[float], f: KernelTensor, evolve: bool = True) -> float:
    """Residual for any move result ``target`` (a triple reached from
    ``source`` with ``sigma = id``)."""
    lhs = eval_J(model, target.mu, target.sgn, t1, reorder_times(target.sigma, times), f, evolve)
    rhs = eval_J(model, source.mu, source.sgn, t1, times, f, evolve)
    return relative_residual(lhs.data, rhs.data)


def check_wild_identity(model: LatticeModel, f: KernelTensor, t2: float, t3: float,
                        require_symmetric: bool = True, tol: float = 1e-10) -> float:
    """Max-norm residual of the elementary wild identity

    ``U(-t_2) B^-_{1,2} U(t_2-t_3) B^+_{1,3} U(t_3) f
    = U(-t_3) B^+_{1,2} U(t_3-t_2) B^-_{1,3} U(t_2) f``,

    relative to the left side.

    Raises
    ------
    SymmetryError
        If ``require_symmetric`` and ``f`` is not a symmetric density.
    """
    if f.m != 3:
        raise KernelShapeError("the wild identity acts on 3-particle kernels")
    if require_symmetric and symmetry_residual(f) > tol:
        raise SymmetryError("the wild identity needs a symmetric density")

    def side(s_a, s_b, ta, tb):
        g = apply_free(model, 3, ta, f)
        g = apply_collapse(1, 3, s_b, g)
        g = apply_free(model, 2, tb - ta, g)
        g = apply_collapse(1, 2, s_a, g)
        return apply_free(model, 1, -tb, g)

    lhs = side(MINUS, PLUS, t3, t2)
    rhs = side(PLUS, MINUS, t2, t3)
    return relative_residual(lhs.data, rhs.data)


# ---------------------------------------------------------------------------
# factorized evaluation


def _factor_value(model, tree: DTree, j: int, t: dict, F, C):
    """Pulled-back factor ``D^(j)(t_j)`` for one pure component."""
    node = tree.nodes[j]
    U = model.propagator(t[j])
    vals = []
    for slot in node.children():
        if slot.kind == "F":
            v = F
        elif slot.kind == "C":
            v = C
        else:
            v = _factor_value(model, tree, slot.label, t, F, C)
        v = U @ v
        vals.append(v.conj() if slot.conj else v)
    return model.propagator(-t[j]) @ (vals[0] * vals[1] * vals[2])


def _pure_parts(model, s: float, phi: np.ndarray, evolve: bool):
    """Pulled-back ``F`` and ``C`` at the outermost time ``s``."""
    if evolve:
        phi = model.propagator(s) @ phi
    Ub = model.propagator(-s)
    return Ub @ phi, Ub @ (np.abs(phi) ** 2 * phi)


def eval_factorized(model: LatticeModel, pair: Pair, t1: float, times: Sequence[float],
                    mixture: ProductMixture, evolve: bool = False) -> KernelTensor:
    """``J_{mu,sgn}`` through its cubic factors, component by component.

    ``gamma(x_1; x_1') = sum_a c_a (U_1 X_a)(x_1) conj(U_1 Y_a)(x_1')`` with
    ``X, Y`` the ``r+`` and ``r-`` slots of ``D^(1)``.
    """
    tree = factor_tree(pair)
    k = pair.k
    t = {1: t1}
    t.update({j: times[j - 2] for j in range(2, k + 2)})
    U1 = model.propagator(t1)
    out = np.zeros((model.N, model.N), dtype=complex)
    for c, phi in zip(mixture.coefs, mixture.phis):
        F, C = _pure_parts(model, t[k + 1], phi, evolve)
        root = tree.nodes[1]
        xy = []
        for name in ("r+", "r-"):
            slot = root.slots[name]
            if slot.kind == "F":
                v = F
            elif slot.kind == "C":
                v = C
            else:
                v = _factor_value(model, tree, slot.label, t, F, C)
            xy.append(U1 @ v)
        out += c * np.multiply.outer(xy[0], xy[1].conj())
    return KernelTensor(1, out)


# ---------------------------------------------------------------------------
# quadrature


def time_grid(t1: float, grid: int) -> np.ndarray:
    """Left endpoints ``t_1 g / grid`` for ``g = 0..grid-1``."""
    return t1 * np.arange(grid) / grid


def grid_points(k: int, t1: float, grid: int, distinct: bool = False):
    """Grid points ``(t_2, ..., t_{k+1})``; ``distinct`` drops points with ties."""
    values = time_grid(t1, grid)
    if distinct:
        for idx in itertools.permutations(range(grid), k):
            yield tuple(values[i] for i in idx)
    else:
        for idx in itertools.product(range(grid), repeat=k):
            yield tuple(values[i] for i in idx)


def _check_quadrature_k(k: int, max_k: int):
    if k > max_k:
        raise ResourceLimitError(f"quadrature at k={k} exceeds the cap k <= {max_k}")


def domain_quadrature(model: LatticeModel, pair: Pair, dom: DomainPoset, f: KernelTensor,
                      grid: int, t1: float = 1.0, distinct: bool = True,
                      evolve: bool = True) -> np.ndarray:
    """Riemann sum of ``J_{mu,sgn}`` over the grid points inside ``dom``."""
    k = pair.k
    h = (t1 / grid) ** k
    out = np.zeros((model.N, model.N), dtype=complex)
    for pt in grid_points(k, t1, grid, distinct):
        if domain_indicator(dom, (t1,) + pt):
            out += eval_J(model, pair.mu, pair.sgn, t1, pt, f, evolve).data
    return h * out


def quadrature_gamma1(model: LatticeModel, k: int, f: KernelTensor, grid: int, mode: str,
                      t1: float = 1.0, classes=None, evolve: bool = True,
                      max_k: int = MAX_QUADRATURE_K) -> np.ndarray:
    """Grid approximation of the order-``k`` term of ``gamma^(1)(t_1)``.

    ``"raw"`` sums every signed pair over the ordered simplex
    ``t_1 >= t_2 >= ... >= t_{k+1}``; ``"grouped"`` sums each reference
    integrand over its ``T_R``.  Both use the same grid restricted to points
    with pairwise distinct coordinates, where the simplexes of a class are
    disjoint.  The density follows its free path (``evolve``).
    """
    from kmgame.moves import classify
    from kmgame.core import enumerate_pairs

    _check_quadrature_k(k, max_k)
    if mode == "raw":
        chain = simplex_domain(TimePermutation.identity(k))
        terms = [(p, chain) for p in enumerate_pairs(k)]
    elif mode == "grouped":
        classes = classes if classes is not None else classify(k)
        terms = [(c.reference, reference_domain(c.reference)) for c in classes]
    else:
        raise ValueError("mode must be 'raw' or 'grouped'")
    out = np.zeros((model.N, model.N), dtype=complex)
    for pair, dom in terms:
        out += domain_quadrature(model, pair, dom, f, grid, t1, evolve=evolve)
    return out


def factorized_quadrature(model: LatticeModel, pair: Pair, mixture: ProductMixture,
                          grid: int, t1: float = 1.0, dom: Optional[DomainPoset] = None,
                          evolve: bool = True) -> np.ndarray:
    """Nested grid sums following the D-tree: each factor's time is summed
    inside its parent's product, bounded by the parent's time (and by
    ``t_{k+1}`` below for the parent of ``t_{k+1}``)."""
    from kmgame.dtree import duhamel_expression

    tree = factor_tree(pair)
    k = pair.k
    dom = dom or reference_domain(pair, check=False)
    expr = duhamel_expression(tree, dom)
    lower = {lim.var: lim.lower for lim in expr.limits()}
    values = time_grid(t1, grid)
    h = t1 / grid
    out = np.zeros((model.N, model.N), dtype=complex)
    U1 = model.propagator(t1)

    for c, phi in zip(mixture.coefs, mixture.phis):
        for s in values:
            F, C = _pure_parts(model, s, phi, evolve)

            @lru_cache(maxsize=None)
            def integral(j, upper_idx):
                # sum over grid t_j in [lower, values[upper_idx]] (upper_idx=None: t_1)
                top = t1 if upper_idx is None else values[upper_idx]
                lo = s if lower.get(j) == k + 1 else 0.0
                acc = np.zeros(model.N, dtype=complex)
                for gi, tj in enumerate(values):
                    if lo <= tj <= top:
                        acc += h * factor_at(j, gi)
                return acc

            def slot_value(slot, gi):
                if slot.kind == "F":
                    return F
                if slot.kind == "C":
                    return C
                return integral(slot.label, gi)

            def factor_at(j, gi):
                U = model.propagator(values[gi])
                vals = []
                for slot in tree.nodes[j].children():
                    v = U @ slot_value(slot, gi)
                    vals.append(v.conj() if slot.conj else v)
                return model.propagator(-values[gi]) @ (vals[0] * vals[1] * vals[2])

            xy = []
            for name in ("r+", "r-"):
                slot = tree.nodes[1].slots[name]
                v = slot_value(slot, None) if slot.kind == "D" else (F if slot.kind == "F" else C)
                xy.append(U1 @ v)
            out += c * h * np.multiply.outer(xy[0], xy[1].conj())
    return out


def direct_quadrature(model: LatticeModel, pair: Pair, f: KernelTensor, grid: int,
                      t1: float = 1.0, dom: Optional[DomainPoset] = None,
                      evolve: bool = True) -> np.ndarray:
    """Closed-indicator grid sum of ``eval_J`` over ``dom`` (default ``T_R`` rule)."""
    dom = dom or reference_domain(pair, check=False)
    return domain_quadrature(model, pair, dom, f, grid, t1, distinct=False, evolve=evolve)


def two_term_identity(model: LatticeModel, f: KernelTensor, grid: int, t1: float = 1.0,
                      evolve: bool = True):
    """Grid sums of the two upper echelon integrals that merge into one
    reference integral.

    ``I_1`` (``mu = (1,1,2)``, signs ``-++``) over its ``T_D`` plus ``I_2``
    (``mu = (1,1,3)``, signs ``+-+``) over its ``T_D`` against ``I_2``'s
    integrand over the combined domain ``T_R``.

    Returns
    -------
    (lhs, rhs) : tuple of ndarray
    """
    from kmgame.domains import upper_echelon_domain

    i1 = make_pair((1, 1, 2), "-++")
    i2 = make_pair((1, 1, 3), "+-+")
    lhs = (domain_quadrature(model, i1, upper_echelon_domain(i1.mu), f, grid, t1, evolve=evolve)
           + domain_quadrature(model, i2, upper_echelon_domain(i2.mu), f, grid, t1, evolve=evolve))
    rhs = domain_quadrature(model, i2, reference_domain(i2), f, grid, t1, evolve=evolve)
    return lhs, rhs
