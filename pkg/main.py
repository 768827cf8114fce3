"""Command-line entrypoint for running from a source checkout.

Installed copies use the ``reflectionless`` console script instead.
"""
from __future__ import annotations

import sys
from pathlib import Path

# Ensure the "src" directory is on the import path so that the package can be
# imported without installing it first.
ROOT_DIR = Path(__file__).resolve().parent
SRC_DIR = ROOT_DIR / "src"

if str(SRC_DIR) not in sys.path:
    sys.path.insert(0, str(SRC_DIR))

from refless.main import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
