"""Shared plumbing: bounded parallelism, CSV/JSON artifact writers."""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Iterable, Sequence


def thread_budget() -> int:
    """Parallelism cap from NEURONLAB_THREADS (default 1 = serial)."""
    try:
        return max(1, int(os.environ.get("NEURONLAB_THREADS", "1")))
    except ValueError:
        return 1


def parallel_map(fn: Callable, items: Iterable) -> list:
    items = list(items)
    n = thread_budget()
    if n <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def fmt17(v: float) -> str:
    """Fixed 17-significant-digit float formatting for deterministic artifacts."""
    return format(float(v), ".17g")


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence], schema: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(f"# schema: {schema} v1\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt17(v) if isinstance(v, float) else v for v in row])


def write_json(path, payload: dict) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
