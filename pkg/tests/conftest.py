import itertools
import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / 'src'))

from iic.config import CONFIG_ENV, SEED_ENV, get_settings  # noqa: E402
from iic.generators import EnumerationConfig, random_mixed_graph  # noqa: E402


@pytest.fixture(autouse=True)
def clean_settings(monkeypatch):
    monkeypatch.delenv(CONFIG_ENV, raising=False)
    monkeypatch.delenv(SEED_ENV, raising=False)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


def directed_paths(g, start, end):
    """Every simple directed path from ``start`` to ``end`` (``(start,)`` when equal)."""
    if start == end:
        return [(start,)]
    out = []
    stack = [(start,)]
    while stack:
        path = stack.pop()
        for c in g.ch(path[-1]):
            if c == end:
                out.append(path + (c,))
            elif c not in path:
                stack.append(path + (c,))
    return out


def halftrek_right_sides(g, v, w):
    sides = [frozenset(p) for p in directed_paths(g, v, w)]
    for s in g.sib(v):
        sides += [frozenset(p) for p in directed_paths(g, s, w)]
    return sides


def brute_system_size(g, targets, pool):
    """Largest half-trek system with no sided intersection, by exhaustive search."""
    targets = sorted(targets)
    pool = sorted(pool)
    sides = {(v, w): halftrek_right_sides(g, v, w) for v in pool for w in targets}

    def best(idx, used_sources, used_right):
        if idx == len(targets):
            return 0
        top = best(idx + 1, used_sources, used_right)
        for v in pool:
            if v in used_sources:
                continue
            for right in sides[(v, targets[idx])]:
                if right & used_right:
                    continue
                top = max(top, 1 + best(idx + 1, used_sources | {v}, used_right | right))
        return top

    return best(0, frozenset(), frozenset())


def make_random_graphs(count, n_values=(3, 4), p_dir=0.5, p_bi=0.4, seed=7):
    rng = np.random.default_rng(seed)
    graphs = []
    for n in itertools.islice(itertools.cycle(n_values), count):
        graphs.append(random_mixed_graph(EnumerationConfig(n=n, p_dir=p_dir, p_bi=p_bi), rng))
    return graphs


@pytest.fixture(scope='session')
def small_graphs():
    return make_random_graphs(60)


@pytest.fixture(scope='session')
def medium_graphs():
    return make_random_graphs(40, n_values=(5, 6), p_dir=0.4, p_bi=0.3, seed=11)
