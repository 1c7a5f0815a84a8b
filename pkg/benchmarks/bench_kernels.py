"""Compiled against pure-Python graph kernels on deployment-sized graphs.

    python benchmarks/bench_kernels.py [--nodes 100 250 1000] [--repeat 5]
"""
import argparse
import timeit

from ftmrs import _pykernels
from ftmrs.core import Position
from ftmrs.topology import build_graph, deploy

try:
    from ftmrs import _kernels
except ImportError:
    _kernels = None


def _graph(n, seed=1):
    nodes = deploy(n, (300.0, 300.0), seed=seed)
    return build_graph(nodes, 80.0, Position(150.0, 300.0))


def bench(n, repeat):
    g = _graph(n)
    w = g.weights(800)
    # route from the node farthest from the sink
    far = max(range(n), key=lambda v: g.distance(v, g.bs))
    calls = {
        "shortest_path": lambda mod: mod.shortest_path(g.indptr, g.indices, w, g.state, far, g.bs),
        "bfs_hops": lambda mod: mod.bfs_hops(g.indptr, g.indices, g.state, g.bs),
    }
    rows = []
    for name, call in calls.items():
        if _kernels is not None:
            # both backends must agree before their timings mean anything
            a, b = call(_pykernels), call(_kernels)
            if name == "shortest_path":
                assert list(a[0]) == list(b[0]) and a[1] == b[1]
            else:
                assert list(a) == list(b)
        t_py = min(timeit.repeat(lambda: call(_pykernels), number=1, repeat=repeat))
        t_cy = min(timeit.repeat(lambda: call(_kernels), number=1, repeat=repeat)) if _kernels else None
        rows.append((n, name, t_py, t_cy))
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, nargs="+", default=[100, 250, 1000, 2500])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    print(f"{'nodes':>6} {'kernel':<14} {'python ms':>10} {'cython ms':>10} {'speedup':>8}")
    for n in args.nodes:
        for n_, name, t_py, t_cy in bench(n, args.repeat):
            if t_cy is None:
                print(f"{n_:>6} {name:<14} {t_py * 1e3:>10.3f} {'n/a':>10} {'n/a':>8}")
            else:
                print(f"{n_:>6} {name:<14} {t_py * 1e3:>10.3f} {t_cy * 1e3:>10.3f} {t_py / t_cy:>7.1f}x")


if __name__ == "__main__":
    main()
