#!/usr/bin/env python3
"""
Command-line entry point for the generalized Hermite subdivision toolkit.

Usage:
    python scripts/ghsd_cli.py analyze --example ex6.2a
    python scripts/ghsd_cli.py smoothness mask.json --json
    python scripts/ghsd_cli.py verify --all
"""

import sys
from pathlib import Path

# Add the package directory to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root / "ghsd"))

# Import after path setup
from cli.commands import main


if __name__ == "__main__":
    sys.exit(main())
