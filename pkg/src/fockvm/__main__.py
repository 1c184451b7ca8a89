"""Module execution entry: python -m fockvm."""

from .cli import main

if __name__ == "__main__":
    raise SystemExit(main())
