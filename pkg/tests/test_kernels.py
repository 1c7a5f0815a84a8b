import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ftmrs import _pykernels, kernels

cy = pytest.importorskip("ftmrs._kernels")


def random_csr(rng, n, p):
    upper = np.triu(rng.random((n, n)) < p, 1)
    adj = upper | upper.T
    indptr = np.concatenate([[0], np.cumsum(adj.sum(axis=1))]).astype(np.int64)
    indices = np.nonzero(adj)[1].astype(np.int64)
    # quantised weights so cost ties actually happen
    w = rng.integers(1, 4, size=(n, n)).astype(np.float64)
    w = np.triu(w, 1) + np.triu(w, 1).T
    weights = w[np.nonzero(adj)]
    return indptr, indices, weights


@settings(max_examples=200)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 25), p=st.floats(0.05, 0.6),
       allow_direct=st.booleans())
def test_backends_agree(seed, n, p, allow_direct):
    rng = np.random.default_rng(seed)
    indptr, indices, weights = random_csr(rng, n, p)
    state = rng.choice(np.array([0, 0, 0, 1, 2], dtype=np.uint8), size=n)
    src, dst = (int(v) for v in rng.choice(n, 2, replace=False))
    state[src] = state[dst] = 0
    assert _pykernels.shortest_path(indptr, indices, weights, state, src, dst, allow_direct) == \
        cy.shortest_path(indptr, indices, weights, state, src, dst, allow_direct)
    assert np.array_equal(_pykernels.bfs_hops(indptr, indices, state, src),
                          cy.bfs_hops(indptr, indices, state, src))


def test_read_only_inputs():
    rng = np.random.default_rng(5)
    arrays = random_csr(rng, 12, 0.3)
    state = np.zeros(12, dtype=np.uint8)
    for a in (*arrays, state):
        a.setflags(write=False)
    assert cy.shortest_path(*arrays, state, 0, 11) == _pykernels.shortest_path(*arrays, state, 0, 11)


def test_default_backend_is_compiled():
    assert kernels.BACKEND == "cython"


@pytest.mark.parametrize("env, want", [("1", "python"), ("0", "cython")])
def test_env_selects_backend(env, want):
    code = "import ftmrs; print(ftmrs.BACKEND)"
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, check=True,
                         env=dict(os.environ, FTMRS_PURE_PYTHON=env))
    assert out.stdout.strip() == want
