"""Operational metrics: check timing split and memory samples."""

from __future__ import annotations

import resource
import threading
import time
from collections import deque


def _rss_mb() -> float:
    # ru_maxrss is kilobytes on Linux.
    return resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024.0


class MetricsCollector:
    def __init__(self, history: int = 1000):
        self._lock = threading.Lock()
        self._checks: deque = deque(maxlen=history)  # (ts, server_handling, prover_wait)
        self._memory: deque = deque(maxlen=history)  # (ts, rss_mb)

    def record_check(self, server_handling: float, prover_wait: float) -> None:
        now = time.time()
        with self._lock:
            self._checks.append((now, server_handling, prover_wait))
            self._memory.append((now, _rss_mb()))

    def snapshot(self, active_users: int = 0) -> dict:
        with self._lock:
            checks = list(self._checks)
            memory = list(self._memory)
        handling = [c[1] for c in checks]
        prover = [c[2] for c in checks]

        def stats(values: list[float]) -> dict:
            if not values:
                return {"count": 0, "avg": 0.0, "max": 0.0}
            return {
                "count": len(values),
                "avg": sum(values) / len(values),
                "max": max(values),
            }

        return {
            "checks": {
                "count": len(checks),
                "server_handling": stats(handling),
                "prover_wait": stats(prover),
            },
            "recent_checks": [
                {"server_handling": h, "prover_wait": p} for _, h, p in checks[-50:]
            ],
            "active_users": active_users,
            "memory": {
                "rss_mb": _rss_mb(),
                "samples": [{"ts": ts, "rss_mb": mb} for ts, mb in memory[-50:]],
            },
        }
