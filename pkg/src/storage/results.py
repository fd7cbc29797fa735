"""
Stores for cached command results

Values are the JSON-compatible dicts returned by the MCP tools. Expiry is an
absolute deadline in epoch seconds; a result without a deadline never expires.
"""
import asyncio
import json
import logging
import os
import time
from abc import ABC, abstractmethod
from contextlib import asynccontextmanager
from typing import Any, AsyncIterator, Dict, Optional, Tuple

import aiosqlite

from ..config import get_settings

logger = logging.getLogger(__name__)

Payload = Dict[str, Any]


def _now() -> float:
    return time.time()


def _deadline(ttl: Optional[int]) -> Optional[float]:
    return _now() + ttl if ttl else None


class ResultStore(ABC):
    """Key-value store for command results with optional expiry"""

    @abstractmethod
    async def set(self, key: str, value: Payload, expire_seconds: Optional[int] = None) -> None:
        ...

    @abstractmethod
    async def get(self, key: str) -> Optional[Payload]:
        """Stored value, None when absent or expired"""

    @abstractmethod
    async def delete(self, key: str) -> None:
        ...

    async def exists(self, key: str) -> bool:
        return await self.get(key) is not None

    @abstractmethod
    async def clear_expired(self) -> int:
        """Drop expired entries and return how many went"""


_SCHEMA = (
    """CREATE TABLE IF NOT EXISTS command_results (
           key TEXT PRIMARY KEY,
           payload TEXT NOT NULL,
           expires_at REAL,
           stored_at REAL NOT NULL
       )""",
    """CREATE INDEX IF NOT EXISTS idx_command_results_expiry
       ON command_results(expires_at) WHERE expires_at IS NOT NULL""",
)


class SQLiteResultStore(ResultStore):
    """Results persisted in one SQLite table, surviving restarts"""

    def __init__(self, db_path: str = "data/results.db"):
        self.db_path = db_path
        directory = os.path.dirname(db_path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        self._ready = False
        self._schema_lock = asyncio.Lock()

    @asynccontextmanager
    async def _connection(self) -> AsyncIterator[aiosqlite.Connection]:
        async with aiosqlite.connect(self.db_path) as db:
            if not self._ready:
                async with self._schema_lock:
                    for statement in _SCHEMA:
                        await db.execute(statement)
                    self._ready = True
                    logger.debug("result table ready in %s", self.db_path)
            yield db
            await db.commit()

    async def set(self, key: str, value: Payload, expire_seconds: Optional[int] = None) -> None:
        async with self._connection() as db:
            await db.execute(
                "INSERT OR REPLACE INTO command_results (key, payload, expires_at, stored_at) "
                "VALUES (?, ?, ?, ?)",
                (key, json.dumps(value, sort_keys=True), _deadline(expire_seconds), _now()),
            )

    async def get(self, key: str) -> Optional[Payload]:
        async with self._connection() as db:
            cursor = await db.execute(
                "SELECT payload FROM command_results "
                "WHERE key = ? AND (expires_at IS NULL OR expires_at > ?)",
                (key, _now()),
            )
            row = await cursor.fetchone()
        return json.loads(row[0]) if row else None

    async def delete(self, key: str) -> None:
        async with self._connection() as db:
            await db.execute("DELETE FROM command_results WHERE key = ?", (key,))

    async def clear_expired(self) -> int:
        async with self._connection() as db:
            cursor = await db.execute(
                "DELETE FROM command_results WHERE expires_at IS NOT NULL AND expires_at <= ?",
                (_now(),),
            )
            removed = cursor.rowcount
        if removed:
            logger.info("dropped %d expired results", removed)
        return removed


class InMemoryResultStore(ResultStore):
    """Process-local store (tests and single-run use)"""

    def __init__(self):
        self.entries: Dict[str, Tuple[str, Optional[float]]] = {}

    async def set(self, key: str, value: Payload, expire_seconds: Optional[int] = None) -> None:
        # kept serialized so callers never share mutable state with the store
        self.entries[key] = (json.dumps(value), _deadline(expire_seconds))

    async def get(self, key: str) -> Optional[Payload]:
        entry = self.entries.get(key)
        if entry is None:
            return None
        payload, deadline = entry
        if deadline is not None and deadline <= _now():
            del self.entries[key]
            return None
        return json.loads(payload)

    async def delete(self, key: str) -> None:
        self.entries.pop(key, None)

    async def clear_expired(self) -> int:
        now = _now()
        expired = [key for key, (_, deadline) in self.entries.items()
                   if deadline is not None and deadline <= now]
        for key in expired:
            del self.entries[key]
        return len(expired)


def get_result_store(storage_type: Optional[str] = None) -> ResultStore:
    """Store selected by STORAGE_TYPE (sqlite or memory)"""
    settings = get_settings()
    kind = storage_type or settings.storage_type
    if kind == "sqlite":
        return SQLiteResultStore(settings.sqlite_db_path)
    if kind == "memory":
        return InMemoryResultStore()
    raise ValueError(f"Unknown storage type: {kind}")
