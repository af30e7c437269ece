"""
dimfibre command-line entry point

    uv run main.py --help
"""

import sys

from cli import run


def main():
    return run()


if __name__ == "__main__":
    sys.exit(main())
