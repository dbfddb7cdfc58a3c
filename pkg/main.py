"""
z2chain - Main Entry Point

Computes the Z2 invariant of chiral or particle-hole symmetric
one-dimensional insulators and checks it against winding numbers and the
edge states of truncated chains.

To run:
1. Install the dependencies: uv sync
2. Run: uv run python main.py invariant --model ssh --delta 0.5
3. See all commands: uv run python main.py --help
"""

import os
import sys

# Add our src directory to the Python path so we can import our modules
sys.path.append(os.path.join(os.path.dirname(__file__), "src"))

from ui.cli import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
