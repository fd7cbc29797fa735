"""
MCP tool functions
"""
