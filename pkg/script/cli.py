__doc__ = """
`lumipower` command group. Exit codes: 0 success, 1 usage error,
2 data/configuration/checkpoint error, 3 numeric failure.
"""

import os
import sys

import click

from lumipower.errors import ConfigError, DataError, NumericError, ShapeError
from lumipower.tensor import configure_threads
from lumipower.utility.cli_color import bcolors, colored
from lumipower.utility.logging import get_script_logger

from script.cross_validate import cross_validate
from script.power_map import power_map
from script.predict import predict
from script.report import report
from script.synth import synth
from script.train import train

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

logger = get_script_logger(os.path.basename(__file__))


@click.group()
@click.version_option(package_name="lumipower")
@click.pass_context
def cli(ctx):
    """Module power and per-cell power-loss maps from PL images."""
    ctx.ensure_object(dict)
    logger.debug(f"kernel threads: {configure_threads()}")


for command in (synth, train, cross_validate, predict, power_map, report):
    cli.add_command(command)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        cli.main(args=argv, prog_name="lumipower", standalone_mode=False, obj={"argv": argv})
    except click.exceptions.Abort:
        return EXIT_USAGE
    except click.ClickException as err:
        err.show()
        return EXIT_USAGE
    except NumericError as err:
        print(colored(f"numeric failure: {err}", bcolors.FAIL), file=sys.stderr)
        return EXIT_NUMERIC
    except (DataError, ConfigError, ShapeError, FileNotFoundError) as err:
        print(colored(f"error: {err}", bcolors.FAIL), file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
