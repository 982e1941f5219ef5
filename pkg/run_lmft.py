"""
Launcher for running lmft from a source checkout without installing the package.

Example usage: python ./run_lmft.py check-weights --seed 7
"""

import sys

from lmft.cli import main

if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
