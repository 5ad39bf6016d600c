#!/usr/bin/env python3
"""Print the acceptance summary (one line per criterion) without pytest."""

import runpy
from pathlib import Path

runpy.run_path(str(Path(__file__).resolve().parent.parent / "tests" / "test_acceptance.py"), run_name="__main__")
