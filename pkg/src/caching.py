# caching.py
import logging
import threading

from operators import assemble_operators

logger = logging.getLogger(__name__)


class OperatorCache:
    """
    An in-memory cache of assembled OperatorSets, keyed by
    (n_cells, bc, a_disabled), so repeated runs on one grid skip the
    eigendecomposition.
    """

    def __init__(self):
        self._cache = {}
        self._lock = threading.Lock()

    def get(self, grid, bc='neumann', a_disabled=False):
        """Returns the cached set, assembling it on a miss."""
        key = (grid.n_cells, bc, bool(a_disabled))
        with self._lock:
            ops = self._cache.get(key)
        if ops is not None:
            logger.debug("Operator cache hit for %s", key)
            return ops
        ops = assemble_operators(grid, bc, a_disabled)
        with self._lock:
            self._cache.setdefault(key, ops)
        return ops

    def __len__(self):
        return len(self._cache)


class DummyCache:
    """
    A cache that stores nothing. Used with --no-cache so the same code path
    runs without conditional checks.
    """

    def get(self, grid, bc='neumann', a_disabled=False):
        return assemble_operators(grid, bc, a_disabled)

    def __len__(self):
        return 0
