from .cache import ResultCache, get_result_cache, reset_result_cache, result_key
from .results import InMemoryResultStore, ResultStore, SQLiteResultStore, get_result_store

__all__ = [
    "InMemoryResultStore",
    "ResultCache",
    "ResultStore",
    "SQLiteResultStore",
    "get_result_cache",
    "get_result_store",
    "reset_result_cache",
    "result_key",
]
