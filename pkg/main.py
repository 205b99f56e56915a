#!/usr/bin/env python3
"""
Main entry point for the scanpath toolkit.

    python main.py <command> ...      same as python -m scanpath.cli
    python main.py serve              HTTP scoring service (hypercorn)
"""

import os
import sys

current_dir = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, current_dir)

from scanpath.cli import main

if __name__ == "__main__":
    sys.exit(main())
