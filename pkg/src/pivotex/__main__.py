"""Entry point for running pivotex as a module (python -m pivotex)."""

from pivotex.cli import main


if __name__ == "__main__":
    main()
