"""Entry point: CLI by default, web surface with --web."""
import sys

from .cli import main as run_cli


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
