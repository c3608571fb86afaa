#!/usr/bin/env python3
"""
Fractional Sobolev Lab - command-line launcher

    python run_lab.py selftest
    python run_lab.py bbm --desc gaussian --p 2 -v
"""

import sys
sys.path.append('src')
from src.cli import run


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
