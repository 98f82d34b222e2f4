from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Iterable, Iterator, List, Sequence, Tuple, TypeVar
import logging
import os

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def iter_data_lines(path: str | Path) -> Iterator[Tuple[int, List[str]]]:
    """Yield (1-based line number, whitespace tokens), skipping blanks and '#' comments"""
    with open(path, "r") as f:
        for lineno, raw in enumerate(f, start=1):
            content = raw.split("#", 1)[0].strip()
            if content:
                yield lineno, content.split()


def format_float(value: float) -> str:
    """Shortest text that parses back to the same double"""
    return repr(float(value))


def resolve_threads(threads: int | None) -> int:
    """Map a thread request to a positive worker count (0/None = all cores)"""
    if threads is None or threads <= 0:
        return max(1, os.cpu_count() or 1)
    return threads


def parallel_map(
    fn: Callable[[T], R], items: Sequence[T] | Iterable[T], threads: int = 1
) -> List[R]:
    """Map in input order; results never depend on the worker count"""
    items = list(items)
    workers = resolve_threads(threads)
    if workers == 1 or len(items) <= 1:
        return [fn(item) for item in items]

    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
