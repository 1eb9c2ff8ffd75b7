"""Small helpers shared by the demo scripts."""

import sys
from pathlib import Path


def output_dir(name: str) -> Path:
    """``demos/output/<name>`` unless a directory is given on the command line."""
    base = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent / "output"
    out = base / name
    out.mkdir(parents=True, exist_ok=True)
    return out
