from concurrent.futures import ThreadPoolExecutor

from caching import DummyCache, OperatorCache
from grid import Grid1D


def test_cache_returns_same_set_per_key():
    cache = OperatorCache()
    first = cache.get(Grid1D(8))
    assert cache.get(Grid1D(8)) is first
    assert len(cache) == 1
    assert cache.get(Grid1D(8), 'dirichlet') is not first
    assert cache.get(Grid1D(8), a_disabled=True).a_disabled
    assert len(cache) == 3


def test_cache_is_shared_across_threads():
    cache = OperatorCache()
    with ThreadPoolExecutor(max_workers=4) as executor:
        sets = list(executor.map(lambda _: cache.get(Grid1D(16)), range(8)))
    assert len(cache) == 1
    assert all(ops is sets[0] or ops.grid.n_cells == 16 for ops in sets)
    assert cache.get(Grid1D(16)) is cache.get(Grid1D(16))


def test_dummy_cache_always_assembles():
    cache = DummyCache()
    assert cache.get(Grid1D(8)) is not cache.get(Grid1D(8))
    assert len(cache) == 3
