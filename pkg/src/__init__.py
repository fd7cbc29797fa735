"""
Interrupt timed automata toolkit
Model checking library, command-line front end and MCP server
"""

__version__ = "1.0.0"
