"""CLI entry point."""

from oscex.cli import main

if __name__ == "__main__":
    main()
