#!/usr/bin/env python3
"""
BoATS toolkit - Main entry point.
Sparse linear estimation benchmarks: BoATS against ridge, lasso and elastic net.

Usage:
    python main.py presets desk
    python main.py benchmark --config config/desk.yaml --out results/desk.csv
"""

import sys

from modules.cli import main


if __name__ == '__main__':
    sys.exit(main())
