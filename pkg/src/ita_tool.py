"""
Interrupt Timed Automata MCP Tool
"""

import json
import logging
from datetime import datetime, timezone
from typing import Any, Awaitable, Callable, Dict, Optional

from fastapi import FastAPI, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response

from src import __version__
from src.config import configure_logging, get_settings
from src.tools.verification import TOOL_FUNCTIONS, TOOLS

logger = logging.getLogger(__name__)

PROTOCOL_VERSION = "2024-11-05"

PARSE_ERROR = -32700
METHOD_NOT_FOUND = -32601
INVALID_PARAMS = -32602
INTERNAL_ERROR = -32603

app = FastAPI(title="Interrupt Timed Automata Tool")

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_methods=["GET", "POST", "OPTIONS"],
    allow_headers=["Content-Type", "Mcp-Session-Id"],
    expose_headers=["Mcp-Session-Id"],
)


class RPCError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code
        self.message = message


def _envelope(request_id: Any, key: str, body: Any, status_code: int = 200) -> JSONResponse:
    return JSONResponse({"jsonrpc": "2.0", "id": request_id, key: body}, status_code=status_code)


async def _initialize(params: Dict[str, Any]) -> Dict[str, Any]:
    return {
        "protocolVersion": PROTOCOL_VERSION,
        "capabilities": {"tools": {}},
        "serverInfo": {"name": "ita-toolkit", "version": __version__},
    }


async def _list_tools(params: Dict[str, Any]) -> Dict[str, Any]:
    return {"tools": TOOLS}


async def _call_tool(params: Dict[str, Any]) -> Dict[str, Any]:
    name = params.get("name")
    tool = TOOL_FUNCTIONS.get(name)
    if tool is None:
        raise RPCError(INVALID_PARAMS, f"Unknown tool: {name}")
    try:
        return await tool(**(params.get("arguments") or {}))
    except TypeError as e:
        raise RPCError(INVALID_PARAMS, f"Invalid arguments for {name}: {e}") from e


METHODS: Dict[str, Callable[[Dict[str, Any]], Awaitable[Dict[str, Any]]]] = {
    "initialize": _initialize,
    "tools/list": _list_tools,
    "tools/call": _call_tool,
}


async def dispatch(message: Dict[str, Any]) -> JSONResponse:
    request_id = message.get("id")
    method: Optional[str] = message.get("method")
    handler = METHODS.get(method)
    logger.info("MCP method: %s", method)
    try:
        if handler is None:
            raise RPCError(METHOD_NOT_FOUND, f"Method not found: {method}")
        return _envelope(request_id, "result", await handler(message.get("params") or {}))
    except RPCError as e:
        return _envelope(request_id, "error", {"code": e.code, "message": e.message})
    except Exception as e:
        logger.exception("MCP error in %s", method)
        return _envelope(request_id, "error", {"code": INTERNAL_ERROR, "message": f"Internal error: {e}"})


@app.post("/mcp")
@app.post("/")
async def mcp_endpoint(request: Request):
    """JSON-RPC entry point: initialize, tools/list and tools/call"""
    raw = await request.body()
    try:
        if not raw:
            raise ValueError("Empty request body")
        message = json.loads(raw)
        if not isinstance(message, dict):
            raise ValueError("expected a JSON object")
    except ValueError as e:
        logger.info("Rejected malformed MCP request: %s", e)
        return _envelope(None, "error", {"code": PARSE_ERROR, "message": f"Parse error: {e}"}, 400)
    return await dispatch(message)


@app.get("/mcp")
async def mcp_info():
    return {"tools": TOOLS}


@app.options("/mcp")
async def mcp_options():
    return Response(status_code=204, headers={"Access-Control-Max-Age": "86400"})


@app.get("/health")
async def health():
    return {
        "status": "healthy",
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "storage_type": get_settings().storage_type,
        "version": __version__,
    }


@app.get("/")
async def root():
    return {"service": app.title, "version": __version__, "endpoints": {"mcp": "/mcp", "health": "/health"}}


@app.api_route("/{path:path}", methods=["GET", "POST", "PUT", "DELETE"])
async def catch_all(request: Request, path: str):
    logger.warning("Unhandled request: %s /%s", request.method, path)
    raise HTTPException(status_code=404, detail=f"Path not found: /{path}")


def main():
    """Run the server"""
    import uvicorn

    configure_logging()
    port = get_settings().port
    logger.info("Starting %s on port %d", app.title, port)
    uvicorn.run(app, host="0.0.0.0", port=port)


if __name__ == "__main__":
    main()
