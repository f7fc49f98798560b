"""Compare the compiled and pure-Python kernels.

Times ``queue_reduce`` over every signed pair of order ``k`` (the inner loop
of ``classify``) and ``topological_orders`` over every reference domain.

    python benchmarks/bench_kernels.py --k 6 --repeat 3
"""

import argparse
import itertools
import json
import time

from kmgame import _backend
from kmgame.domains import reference_domain
from kmgame.moves import classify


def _all_pairs(k):
    maps = list(itertools.product(*[range(1, j) for j in range(2, k + 2)]))
    signs = list(itertools.product((1, -1), repeat=k))
    return maps, signs


def bench_reduce(kernels, maps, signs):
    reduce = kernels.queue_reduce
    start = time.perf_counter()
    for mu in maps:
        for s in signs:
            reduce(mu, s, True)
    return time.perf_counter() - start


def bench_orders(kernels, parent_tables):
    orders = kernels.topological_orders
    start = time.perf_counter()
    n = 0
    for parents in parent_tables:
        n += len(orders(parents))
    return time.perf_counter() - start


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--k", type=int, default=6)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--json", action="store_true", help="print results as JSON")
    args = parser.parse_args(argv)

    maps, signs = _all_pairs(args.k)
    tables = [reference_domain(c.reference).parents() for c in classify(min(args.k, 6))]
    rows = []
    for name in _backend.available_backends():
        kernels = _backend.get_kernels(name)
        rows.append({
            "backend": name,
            "queue_reduce_s": min(bench_reduce(kernels, maps, signs) for _ in range(args.repeat)),
            "topological_orders_s": min(bench_orders(kernels, tables) for _ in range(args.repeat)),
        })
    base = rows[0]
    for row in rows:
        row["reduce_speedup"] = base["queue_reduce_s"] / row["queue_reduce_s"]
        row["orders_speedup"] = base["topological_orders_s"] / row["topological_orders_s"]

    if args.json:
        print(json.dumps({"k": args.k, "pairs": len(maps) * len(signs), "results": rows}, indent=2))
        return
    print(f"k={args.k}: {len(maps) * len(signs)} signed pairs, {len(tables)} reference domains")
    print(f"{'backend':<8} {'queue_reduce':>13} {'speedup':>8} {'topo_orders':>12} {'speedup':>8}")
    for row in rows:
        print(f"{row['backend']:<8} {row['queue_reduce_s']:>12.3f}s {row['reduce_speedup']:>7.1f}x"
              f" {row['topological_orders_s']:>11.3f}s {row['orders_speedup']:>7.1f}x")


if __name__ == "__main__":
    main()
