"""Pure-Python hot kernels.

These are the reference implementations; ``_ckernels.pyx`` mirrors them
line for line.  Both work on plain integer sequences indexed from label 2:
``mu[i]`` is the collapse target of label ``i + 2`` and ``sgn[i]`` is +1/-1.
"""

from collections import deque


def km_swap(mu, sgn, sigma, i, k):
    """Apply the adjacent move (i, i+1) in place on label-indexed arrays.

    ``mu``, ``sgn`` and ``sigma`` have length ``k + 2`` and are indexed by
    label directly (slots 0 and 1 are padding).
    """
    mu[i], mu[i + 1] = mu[i + 1], mu[i]
    sgn[i], sgn[i + 1] = sgn[i + 1], sgn[i]
    for x in range(i + 1, k + 2):
        v = mu[x]
        if v == i:
            mu[x] = i + 1
        elif v == i + 1:
            mu[x] = i
    for x in range(2, k + 2):
        v = sigma[x]
        if v == i:
            sigma[x] = i + 1
        elif v == i + 1:
            sigma[x] = i


def queue_reduce(mu, sgn, signed=True, trace=None):
    """Bring ``(mu, sgn)`` to tamed (``signed``) or upper-echelon form.

    Returns ``(mu', sgn', sigma)`` as tuples indexed from label 2, where
    ``sigma`` is the accumulated time permutation.  If ``trace`` is a list,
    one ``(moves, mu, sgn)`` record is appended per bubbling sweep, with
    ``moves`` the list of left indices ``i`` of the moves KM(i, i+1).
    """
    k = len(mu)
    m = [0, 0] + list(mu)
    s = [0, 0] + list(sgn)
    sig = list(range(k + 2))
    last = k + 1
    queue = deque([1])
    j = 2
    while queue:
        ell = queue.popleft()
        branch = []
        while j <= last:
            if m[j] == ell:
                branch.append(j)
                j += 1
                continue
            r = j + 1
            while r <= last and m[r] != ell:
                r += 1
            if r > last:
                break
            moves = []
            for i in range(r - 1, j - 1, -1):
                km_swap(m, s, sig, i, k)
                moves.append(i)
            if trace is not None:
                trace.append((moves, tuple(m[2:]), tuple(s[2:])))
        if signed:
            queue.extend(x for x in branch if s[x] > 0)
            queue.extend(x for x in branch if s[x] < 0)
        else:
            queue.extend(branch)
    return tuple(m[2:]), tuple(s[2:]), tuple(sig[2:])


def topological_orders(parents):
    """All orders of labels 2..k+1 that list every parent before its child.

    ``parents[i]`` is the parent label of ``i + 2`` (1 is the common root).
    Orders are produced in lexicographic order of the label sequence.
    """
    k = len(parents)
    children = [[] for _ in range(k + 2)]
    for i, p in enumerate(parents):
        children[p].append(i + 2)
    out = []
    order = []
    avail = sorted(children[1])

    def walk(avail):
        if len(order) == k:
            out.append(tuple(order))
            return
        for idx, x in enumerate(avail):
            order.append(x)
            walk(sorted(avail[:idx] + avail[idx + 1:] + children[x]))
            order.pop()

    walk(avail)
    return out
