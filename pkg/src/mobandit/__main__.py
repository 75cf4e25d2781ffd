"""Module entry point so ``python -m mobandit`` matches the installed command."""
from .cli import main

if __name__ == "__main__":
    raise SystemExit(main())
