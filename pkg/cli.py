import sys

import click

from src.core.exceptions import InvalidInputError, NumericalError
from src.routes.commands import app, console


def main(argv: list[str] | None = None) -> int:
    """
    Run the command line and map failures to exit codes.

    0 on success, 1 on usage errors and invalid input, 2 on numerical failures.
    """
    try:
        result = app(args=argv, prog_name="pcf", standalone_mode=False)
    except click.exceptions.UsageError as err:
        err.show()
        return 1
    except click.exceptions.Abort:
        return 1
    except InvalidInputError as err:
        console.print(f"[red]error:[/red] {err}")
        return 1
    except NumericalError as err:
        console.print(f"[red]numerical failure:[/red] {err}")
        return 2
    return result if isinstance(result, int) else 0


if __name__ == "__main__":
    sys.exit(main())
