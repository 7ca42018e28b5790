"""Allow running the CLI with python -m aiwashing_cli."""

from aiwashing_cli.cli import main

if __name__ == "__main__":
    raise SystemExit(main())
