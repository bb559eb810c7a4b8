#!/usr/bin/env python3
"""
rdm launcher.

Usage: python scripts/rdm.py <command> [options]; see --help.
"""
import os
import sys

# Add parent directory to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from pipeline.cli import main


if __name__ == "__main__":
    sys.exit(main())
