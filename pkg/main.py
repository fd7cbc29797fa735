#!/usr/bin/env python3
"""
Main entry point for the ITA MCP tool
This file ensures proper module resolution for deployment
"""

from src.ita_tool import main

if __name__ == "__main__":
    main()
