import itertools
import os
import subprocess
import sys

import pytest
from hypothesis import given, strategies as st

from kmgame import _backend
from kmgame.domains import reference_domain
from kmgame.moves import classify

from strategies import collapse_maps

BACKENDS = _backend.available_backends()
needs_cython = pytest.mark.skipif("cython" not in BACKENDS, reason="compiled kernels not built")


def test_backend_selection():
    assert _backend.BACKEND in BACKENDS
    assert _backend.get_kernels("python").__name__ == "kmgame._pykernels"
    with pytest.raises(ValueError):
        _backend.get_kernels("fortran")


def test_env_var_forces_python():
    env = dict(os.environ, KMGAME_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "import kmgame; print(kmgame.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"


@needs_cython
@pytest.mark.parametrize("k", range(1, 6))
def test_queue_reduce_agrees_exhaustively(k):
    py, cy = _backend.get_kernels("python"), _backend.get_kernels("cython")
    for mu in itertools.product(*[range(1, j) for j in range(2, k + 2)]):
        for sgn in itertools.product((1, -1), repeat=k):
            for signed in (True, False):
                assert py.queue_reduce(mu, sgn, signed) == cy.queue_reduce(mu, sgn, signed)


@needs_cython
@given(collapse_maps(max_k=10), st.data())
def test_queue_reduce_agrees_on_random_pairs(mu, data):
    py, cy = _backend.get_kernels("python"), _backend.get_kernels("cython")
    sgn = tuple(data.draw(st.lists(st.sampled_from((1, -1)), min_size=mu.k, max_size=mu.k)))
    assert py.queue_reduce(mu.values, sgn, True) == cy.queue_reduce(mu.values, sgn, True)


@needs_cython
def test_topological_orders_agree():
    py, cy = _backend.get_kernels("python"), _backend.get_kernels("cython")
    for k in range(1, 6):
        for cls in classify(k):
            parents = reference_domain(cls.reference).parents()
            assert list(py.topological_orders(parents)) == list(cy.topological_orders(parents))


@needs_cython
def test_compiled_trace_is_refused():
    cy = _backend.get_kernels("cython")
    with pytest.raises((TypeError, ValueError)):
        cy.queue_reduce((1, 1), (1, 1), True, [])


def test_benchmark_script_runs(capsys):
    import importlib.util
    from pathlib import Path

    path = Path(__file__).resolve().parent.parent / "benchmarks" / "bench_kernels.py"
    found = importlib.util.spec_from_file_location("bench_kernels", path)
    bench = importlib.util.module_from_spec(found)
    found.loader.exec_module(bench)
    bench.main(["--k", "3", "--repeat", "1", "--json"])
    import json

    data = json.loads(capsys.readouterr().out)
    assert data["pairs"] == 48 and [r["backend"] for r in data["results"]] == BACKENDS
