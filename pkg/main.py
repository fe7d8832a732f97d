#!/usr/bin/env python3
"""Entry point for running newellcast as a script"""

import sys

from newellcast.main import main

if __name__ == "__main__":
    sys.exit(main())
