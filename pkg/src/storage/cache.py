"""
Namespaced result cache keyed by a hash of the command inputs
"""
import hashlib
import json
from typing import Any, Dict, Optional

from ..config import get_settings
from .results import ResultStore, get_result_store


def result_key(model_text: str, command: str, arguments: Dict[str, Any]) -> str:
    """sha256 of a canonical JSON rendering of the inputs"""
    canonical = json.dumps(
        {"model": model_text, "command": command, "arguments": arguments},
        sort_keys=True, separators=(",", ":"), default=str,
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class ResultCache:
    def __init__(self, store: ResultStore, namespace: str = "result", default_ttl: Optional[int] = None):
        self.store = store
        self.namespace = namespace
        self.default_ttl = default_ttl

    def _make_key(self, key: str) -> str:
        return f"{self.namespace}:{key}"

    async def set(self, key: str, value: Dict[str, Any], ttl: Optional[int] = None) -> None:
        if ttl is None:
            ttl = self.default_ttl
        await self.store.set(self._make_key(key), value, ttl)

    async def get(self, key: str) -> Optional[Dict[str, Any]]:
        return await self.store.get(self._make_key(key))

    async def delete(self, key: str) -> None:
        await self.store.delete(self._make_key(key))

    async def exists(self, key: str) -> bool:
        return await self.store.exists(self._make_key(key))

    async def cleanup_expired(self) -> int:
        return await self.store.clear_expired()


# Global cache instance
_result_cache: Optional[ResultCache] = None


def get_result_cache() -> ResultCache:
    global _result_cache
    if _result_cache is None:
        _result_cache = ResultCache(get_result_store(), "result", get_settings().cache_ttl)
    return _result_cache


def reset_result_cache() -> None:
    """Forget the global cache so the next call rebuilds it from the settings"""
    global _result_cache
    _result_cache = None
