#!/usr/bin/env python3
"""
ChabautyLab - spaces of closed subgroups of elementary LCA groups.

Exact duality, quotient types, a certified Chabauty metric and seeded
verification suites behind one command line.

Version: 26.10.0
"""

import os
import sys

# Add the project root to the path for imports
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from cli.app import main


if __name__ == "__main__":
    sys.exit(main())
