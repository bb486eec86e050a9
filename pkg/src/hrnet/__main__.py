"""Run the command-line front end via ``python -m hrnet``."""

import sys

from .cli import main

if __name__ == "__main__":
    sys.exit(main())
