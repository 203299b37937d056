import itertools

import numpy as np
import pytest

ACCEPTANCE_LINES = []


def brute_force_max_forest(matrix, present=None):
    """Max-weight spanning forest weights by enumerating edge subsets.

    Only for tiny graphs. Shares nothing with the library: builds its own
    edge list and checks acyclicity with a DFS.
    """
    m = np.asarray(matrix, dtype=float)
    out_n, in_n = m.shape
    n = in_n + out_n
    edges = [(c, in_n + r, m[r, c]) for r in range(out_n) for c in range(in_n)
             if present is None or present[r][c]]

    def n_components(subset):
        adj = {v: [] for v in range(n)}
        for u, v, _ in subset:
            adj[u].append(v)
            adj[v].append(u)
        seen, comps = set(), 0
        for s in range(n):
            if s in seen:
                continue
            comps += 1
            stack = [s]
            while stack:
                x = stack.pop()
                if x in seen:
                    continue
                seen.add(x)
                stack.extend(adj[x])
        return comps

    target = n - n_components(edges)
    best, best_w = None, -1.0
    for subset in itertools.combinations(edges, target):
        if n_components(subset) != n - target:
            continue
        w = sum(e[2] for e in subset)
        if w > best_w:
            best, best_w = subset, w
    return sorted((e[2] for e in best), reverse=True)


@pytest.fixture
def k22():
    return np.array([[1.0, 0.5], [0.5, 0.5]])


def random_layer_corpus(count, seed, max_side=20):
    """Dense matrices from normal, uniform and tie-heavy discrete distributions."""
    rng = np.random.default_rng(seed)
    kinds = ("normal", "uniform", "discrete")
    for i in range(count):
        rows, cols = rng.integers(1, max_side + 1, size=2)
        kind = kinds[i % 3]
        if kind == "normal":
            w = rng.normal(size=(rows, cols))
        elif kind == "uniform":
            w = rng.uniform(-1, 1, size=(rows, cols))
        else:
            w = rng.integers(-3, 4, size=(rows, cols)).astype(float)
            if not np.any(w):
                w[0, 0] = 1.0
        yield kind, w


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
