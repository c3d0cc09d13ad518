"""Order-preserving parallel map; results never depend on the thread count."""

from concurrent.futures import ThreadPoolExecutor
import os

from .errors import ConfigurationError


def resolve_threads(threads=None):
    """``HK_THREADS`` beats the argument, which beats the core count."""
    env = os.environ.get("HK_THREADS")
    if env:
        try:
            threads = int(env)
        except ValueError:
            raise ConfigurationError(f"HK_THREADS must be an integer, got {env!r}") from None
    if threads is None:
        threads = os.cpu_count() or 1
    if threads < 1:
        raise ConfigurationError("thread count must be >= 1")
    return threads


def pmap(fn, items, threads=None):
    n = resolve_threads(threads)
    items = list(items)
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))
