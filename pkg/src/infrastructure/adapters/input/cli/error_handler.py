import functools
import logging
import sys

import click
from pydantic import ValidationError

from src.domain.exceptions.domain_exceptions import ConfigurationException, DomainException


logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_USAGE = 1
EXIT_FAILED = 2


def handle_errors(command):
    """Map exceptions raised by a command to the exit codes of the tool"""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except ConfigurationException as exc:
            logger.error(f"Configuration error: {exc.message}")
            click.echo(f"Configuration error: {exc.message} {exc.details or ''}", err=True)
            raise click.exceptions.Exit(EXIT_USAGE)
        except ValidationError as exc:
            logger.error(f"Validation error: {exc.errors()}")
            click.echo(f"Invalid experiment config:\n{exc}", err=True)
            raise click.exceptions.Exit(EXIT_USAGE)
        except DomainException as exc:
            logger.error(f"{type(exc).__name__}: {exc.message} {exc.details or ''}")
            click.echo(f"{type(exc).__name__}: {exc.message}", err=True)
            raise click.exceptions.Exit(EXIT_FAILED)

    return wrapper


class ParcapGroup(click.Group):
    """Command group whose usage errors exit with 1 instead of click's 2"""

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            rv = super().main(args=args, prog_name=prog_name, complete_var=complete_var,
                              standalone_mode=False, **extra)
        except click.ClickException as exc:
            exc.show()
            code = EXIT_USAGE
        except click.Abort:
            click.echo("Aborted!", err=True)
            code = EXIT_USAGE
        else:
            code = rv if isinstance(rv, int) else EXIT_PASS
        if standalone_mode:
            sys.exit(code)
        return code
