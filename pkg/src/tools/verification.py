"""
ITA verification MCP tools
"""
import asyncio
import logging
from typing import Any, Callable, Dict, Optional

from .. import commands
from ..storage import get_result_cache, result_key

logger = logging.getLogger(__name__)


def _as_mcp(result: commands.CommandResult) -> Dict[str, Any]:
    return {
        "content": [{"type": "text", "text": result.text}],
        "structuredContent": result.payload,
        "isError": result.is_error,
    }


async def _run_cached(name: str, model: str, arguments: Dict[str, Any],
                      fn: Callable[..., commands.CommandResult], *args, **kwargs) -> Dict[str, Any]:
    """Serve from the result cache, otherwise run `fn` in a worker thread and cache success"""
    try:
        cache = get_result_cache()
        key = result_key(model, name, arguments)
        cached = await cache.get(key)
        if cached is not None:
            logger.debug("%s served from cache", name)
            return cached
        result = await asyncio.to_thread(fn, model, *args, **kwargs)
        response = _as_mcp(result)
        if not result.is_error:
            purged = await cache.cleanup_expired()
            if purged:
                logger.debug("purged %d expired results", purged)
            await cache.set(key, response)
        return response
    except Exception as e:
        logger.exception("%s failed", name)
        return {
            "content": [{"type": "text", "text": f"Error: {str(e)}"}],
            "isError": True
        }


async def validate_model(model: str, require_ita_minus: bool = False) -> Dict[str, Any]:
    """
    Parse and validate an `.ita` model

    Args:
        model: model source text
        require_ita_minus: also report departures from ITA⁻
    """
    return await _run_cached("validate", model, {"require_ita_minus": require_ita_minus},
                             commands.cmd_validate, require_ita_minus=require_ita_minus)


async def simulate_run(model: str, run: str) -> Dict[str, Any]:
    """Replay a run (`time p/q` / `fire <id|letter>` lines) and report the timed word"""
    return await _run_cached("simulate", model, {"run": run}, commands.cmd_simulate, run)


async def build_class_graph(model: str, format: str = "json", formula: Optional[str] = None) -> Dict[str, Any]:
    return await _run_cached("classgraph", model, {"format": format, "formula": formula},
                             commands.cmd_classgraph, fmt=format, formula=formula)


async def check_reachability(model: str, target: str, method: str = "both",
                             depth: Optional[int] = None) -> Dict[str, Any]:
    """
    Decide whether a state (or label) is reachable

    Args:
        model: model source text
        target: state name or label
        method: classgraph, bounded or both
        depth: path depth of the bounded search
    """
    arguments = {"target": target, "method": method, "depth": depth}
    return await _run_cached("reach", model, arguments, commands.cmd_reach,
                             target, method=method, depth=depth)


async def transform_to_ita_minus(model: str) -> Dict[str, Any]:
    return await _run_cached("to-ita-minus", model, {}, commands.cmd_to_ita_minus)


async def untimed_language(model: str, format: str = "json", words: int = 0) -> Dict[str, Any]:
    return await _run_cached("untimed", model, {"format": format, "words": words},
                             commands.cmd_untimed, fmt=format, words=words)


async def check_formula(model: str, formula: str, depth: Optional[int] = None) -> Dict[str, Any]:
    """Model-check a clock-comparison CTL or bounded-until formula"""
    return await _run_cached("check", model, {"formula": formula, "depth": depth},
                             commands.cmd_check, formula, depth=depth)


_MODEL = {"type": "string", "description": "Model source in the .ita format"}
_DEPTH = {"type": "integer", "minimum": 1, "description": "Path depth of bounded searches"}
_FORMAT = {"type": "string", "enum": ["json", "dot"], "description": "Output format"}

TOOLS = [
    {
        "name": "validate_model",
        "description": "Parse an interrupt timed automaton and list well-formedness violations",
        "inputSchema": {
            "type": "object",
            "properties": {
                "model": _MODEL,
                "require_ita_minus": {"type": "boolean", "description": "Also require the ITA⁻ restriction"},
            },
            "required": ["model"],
        },
    },
    {
        "name": "simulate_run",
        "description": "Replay a run and return the final configuration and timed word",
        "inputSchema": {
            "type": "object",
            "properties": {
                "model": _MODEL,
                "run": {"type": "string", "description": "Run file: one `time p/q` or `fire <id|letter>` per line"},
            },
            "required": ["model", "run"],
        },
    },
    {
        "name": "build_class_graph",
        "description": "Build the finite class graph, optionally extended with a formula's clock comparisons",
        "inputSchema": {
            "type": "object",
            "properties": {"model": _MODEL, "format": _FORMAT, "formula": {"type": "string"}},
            "required": ["model"],
        },
    },
    {
        "name": "check_reachability",
        "description": "Decide reachability of a state or label with a witness run",
        "inputSchema": {
            "type": "object",
            "properties": {
                "model": _MODEL,
                "target": {"type": "string", "description": "State name or label"},
                "method": {"type": "string", "enum": ["classgraph", "bounded", "both"]},
                "depth": _DEPTH,
            },
            "required": ["model", "target"],
        },
    },
    {
        "name": "transform_to_ita_minus",
        "description": "Translate an ITA into an equivalent ITA without updates of frozen clocks",
        "inputSchema": {"type": "object", "properties": {"model": _MODEL}, "required": ["model"]},
    },
    {
        "name": "untimed_language",
        "description": "Finite automaton recognising the untimed language",
        "inputSchema": {
            "type": "object",
            "properties": {
                "model": _MODEL,
                "format": _FORMAT,
                "words": {"type": "integer", "minimum": 0, "description": "List accepted words up to this length"},
            },
            "required": ["model"],
        },
    },
    {
        "name": "check_formula",
        "description": "Model-check a CTL formula with clock comparisons or a formula with time-bounded untils",
        "inputSchema": {
            "type": "object",
            "properties": {
                "model": _MODEL,
                "formula": {"type": "string", "description": "e.g. EF (q1 && x2 > x1) or E true U{<=7} safe"},
                "depth": _DEPTH,
            },
            "required": ["model", "formula"],
        },
    },
]

TOOL_FUNCTIONS = {
    "validate_model": validate_model,
    "simulate_run": simulate_run,
    "build_class_graph": build_class_graph,
    "check_reachability": check_reachability,
    "transform_to_ita_minus": transform_to_ita_minus,
    "untimed_language": untimed_language,
    "check_formula": check_formula,
}
