# -*- coding: utf-8 -*-
from __future__ import annotations

import concurrent.futures as fut
import os
from typing import Callable, List, Optional, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def worker_count() -> int:
    """os.cpu_count(), capped by KW_THREADS when set."""
    n = os.cpu_count() or 4
    env = os.environ.get("KW_THREADS", "").strip()
    if env:
        try:
            n = min(n, max(1, int(env)))
        except ValueError:
            pass
    return n


def map_ordered(fn: Callable[[T], R], items: Sequence[T],
                progress_cb: Optional[Callable[[int, int], None]] = None,
                cancel_ev=None) -> List[R]:
    """fn over items on a thread pool; results come back in input order.

    A set ``cancel_ev`` stops collection early and returns the prefix done so far.
    """
    items = list(items)
    total = len(items)
    out: List[R] = []
    if total == 0:
        return out
    workers = min(worker_count(), total)
    if workers == 1:
        for it in items:
            out.append(fn(it))
            if progress_cb: progress_cb(len(out), total)
            if cancel_ev and cancel_ev.is_set(): break
        return out
    with fut.ThreadPoolExecutor(max_workers=workers) as ex:
        for r in ex.map(fn, items):
            out.append(r)
            if progress_cb: progress_cb(len(out), total)
            if cancel_ev and cancel_ev.is_set(): break
    return out
