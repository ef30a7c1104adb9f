"""Per-user push channel between worker threads and websocket handlers.

Workers publish from plain threads; each connected client owns an asyncio
queue on its own event loop, bridged with call_soon_threadsafe. A user may
hold several connections; each gets every message, in publish order.
"""

from __future__ import annotations

import asyncio
import threading
from collections import defaultdict
from typing import Optional


class Subscription:
    def __init__(self, hub: "RealtimeHub", user_id: str):
        self.user_id = user_id
        self.queue: asyncio.Queue = asyncio.Queue()
        self.loop = asyncio.get_running_loop()
        self._hub = hub

    async def next_message(self) -> dict:
        return await self.queue.get()

    def close(self) -> None:
        self._hub.unsubscribe(self)


class RealtimeHub:
    def __init__(self):
        self._subs: dict[str, list[Subscription]] = defaultdict(list)
        self._lock = threading.Lock()

    def subscribe(self, user_id: str) -> Subscription:
        """Must be called from a running event loop (the websocket handler)."""
        sub = Subscription(self, user_id)
        with self._lock:
            self._subs[user_id].append(sub)
        return sub

    def unsubscribe(self, sub: Subscription) -> None:
        with self._lock:
            subs = self._subs.get(sub.user_id, [])
            if sub in subs:
                subs.remove(sub)
            if not subs:
                self._subs.pop(sub.user_id, None)

    def push(self, user_id: str, message: dict) -> None:
        """Thread-safe: deliver to every live connection of one user."""
        with self._lock:
            subs = list(self._subs.get(user_id, []))
        for sub in subs:
            try:
                sub.loop.call_soon_threadsafe(sub.queue.put_nowait, message)
            except RuntimeError:
                pass  # loop already closed; connection is going away

    def connected_users(self) -> set[str]:
        with self._lock:
            return set(self._subs.keys())

    def connection_count(self, user_id: Optional[str] = None) -> int:
        with self._lock:
            if user_id is not None:
                return len(self._subs.get(user_id, []))
            return sum(len(s) for s in self._subs.values())
