"""Allow `python -m readmitlab ...` as an alias for the readmitlab script."""

import sys

from .cli import main

if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
