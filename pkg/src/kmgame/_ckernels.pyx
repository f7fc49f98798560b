# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled twins of the kernels in ``_pykernels``.

Same signatures and outputs; ``queue_reduce`` here does not record traces.
"""

from libc.stdlib cimport malloc, free


cdef inline void _swap(int* m, int* s, int* sig, int i, int k) noexcept nogil:
    cdef int x, v, t
    t = m[i]; m[i] = m[i + 1]; m[i + 1] = t
    t = s[i]; s[i] = s[i + 1]; s[i + 1] = t
    for x in range(i + 1, k + 2):
        v = m[x]
        if v == i:
            m[x] = i + 1
        elif v == i + 1:
            m[x] = i
    for x in range(2, k + 2):
        v = sig[x]
        if v == i:
            sig[x] = i + 1
        elif v == i + 1:
            sig[x] = i


def queue_reduce(mu, sgn, bint signed=True, trace=None):
    if trace is not None:
        raise ValueError("trace recording needs the pure-Python kernel")
    cdef int k = len(mu)
    cdef int n = k + 2
    cdef int* m = <int*> malloc(n * sizeof(int))
    cdef int* s = <int*> malloc(n * sizeof(int))
    cdef int* sig = <int*> malloc(n * sizeof(int))
    cdef int* queue = <int*> malloc(n * sizeof(int))
    cdef int* branch = <int*> malloc(n * sizeof(int))
    cdef int x, i, j, r, ell, head, tail, nb, last
    if not (m and s and sig and queue and branch):
        free(m); free(s); free(sig); free(queue); free(branch)
        raise MemoryError()
    try:
        m[0] = 0; m[1] = 0; s[0] = 0; s[1] = 0
        for x in range(k):
            m[x + 2] = mu[x]
            s[x + 2] = sgn[x]
        for x in range(n):
            sig[x] = x
        last = k + 1
        head = 0
        tail = 1
        queue[0] = 1
        j = 2
        with nogil:
            while head < tail:
                ell = queue[head]
                head += 1
                nb = 0
                while j <= last:
                    if m[j] == ell:
                        branch[nb] = j
                        nb += 1
                        j += 1
                        continue
                    r = j + 1
                    while r <= last and m[r] != ell:
                        r += 1
                    if r > last:
                        break
                    i = r - 1
                    while i >= j:
                        _swap(m, s, sig, i, k)
                        i -= 1
                if signed:
                    for x in range(nb):
                        if s[branch[x]] > 0:
                            queue[tail] = branch[x]
                            tail += 1
                    for x in range(nb):
                        if s[branch[x]] < 0:
                            queue[tail] = branch[x]
                            tail += 1
                else:
                    for x in range(nb):
                        queue[tail] = branch[x]
                        tail += 1
        return (tuple([m[x] for x in range(2, n)]),
                tuple([s[x] for x in range(2, n)]),
                tuple([sig[x] for x in range(2, n)]))
    finally:
        free(m); free(s); free(sig); free(queue); free(branch)


def topological_orders(parents):
    cdef int k = len(parents)
    cdef int n = k + 2
    cdef int i, p, depth, x, c
    # children stored as a CSR table
    cdef int* nchild = <int*> malloc(n * sizeof(int))
    cdef int* start = <int*> malloc((n + 1) * sizeof(int))
    cdef int* kids = <int*> malloc(n * sizeof(int))
    cdef int* fill = <int*> malloc(n * sizeof(int))
    # avail[x] counts how many times x is currently available (0/1)
    cdef char* avail = <char*> malloc(n * sizeof(char))
    cdef int* order = <int*> malloc(n * sizeof(int))
    cdef int* cursor = <int*> malloc(n * sizeof(int))
    out = []
    if not (nchild and start and kids and fill and avail and order and cursor):
        free(nchild); free(start); free(kids); free(fill)
        free(avail); free(order); free(cursor)
        raise MemoryError()
    try:
        for x in range(n):
            nchild[x] = 0
            avail[x] = 0
        for i in range(k):
            nchild[parents[i]] += 1
        start[0] = 0
        for x in range(n):
            start[x + 1] = start[x] + nchild[x]
            fill[x] = start[x]
        for i in range(k):
            p = parents[i]
            kids[fill[p]] = i + 2
            fill[p] += 1
        for c in range(start[1], start[2]):
            avail[kids[c]] = 1
        if k == 0:
            return [()]
        # iterative backtracking; cursor[d] is the last label tried at depth d
        depth = 0
        cursor[0] = 1
        while depth >= 0:
            x = cursor[depth] + 1
            while x < n and not avail[x]:
                x += 1
            if x >= n:
                depth -= 1
                if depth >= 0:
                    # undo the choice made at this depth
                    x = order[depth]
                    for c in range(start[x], start[x + 1]):
                        avail[kids[c]] = 0
                    avail[x] = 1
                    cursor[depth] = x
                continue
            order[depth] = x
            avail[x] = 0
            for c in range(start[x], start[x + 1]):
                avail[kids[c]] = 1
            if depth == k - 1:
                out.append(tuple([order[i] for i in range(k)]))
                for c in range(start[x], start[x + 1]):
                    avail[kids[c]] = 0
                avail[x] = 1
                cursor[depth] = x
                continue
            cursor[depth] = x
            depth += 1
            cursor[depth] = 1
        return out
    finally:
        free(nchild); free(start); free(kids); free(fill)
        free(avail); free(order); free(cursor)
