#!/usr/bin/env python3
"""Run the iic command line from a checkout without installing anything.

Usage:
  python scripts/iic-cli.py fixture sachs | python scripts/iic-cli.py classify -
  python scripts/iic-cli.py bench seed_sources --n 4

See ``src/iic/cli.py`` for the commands and exit codes.
"""
from __future__ import annotations
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / 'src'))

from iic.cli import main  # noqa: E402


if __name__ == '__main__':
    raise SystemExit(main(sys.argv[1:]))
