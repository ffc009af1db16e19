"""CLI subcommand decorators.

Decorators used to add common functionality to subcommands.

"""
import functools
import logging

import click

from htr.__version__ import __version__
from htr.cli.formatter import FORMATTERS
from htr.cli.parameter import tensor_parameter
from htr.exceptions import ConstructionFailure, TensorFileError
from htr.sampling import EXAMPLES
from htr.util import FIELDS, TOLERANCES, load_config

LOGGER = logging.getLogger(__name__)

OUTPUT_FORMATS = ["json", "csv", "txt", "xml"]
CONFIG_OPTIONS = ("seed", "restarts", "method", "workers")


def with_meta(result, seed):
    """Attach the version, seed and tolerances a record was produced with."""
    if isinstance(result, dict) and "meta" not in result:
        result = dict(result)
        result["meta"] = {
            "version": __version__,
            "seed": seed,
            "tolerances": dict(TOLERANCES),
        }
    return result


def echo_result(function):
    """Decorator that prints subcommand results correctly formatted.

    :param function: Subcommand that returns a result record.
    :type function: callable
    :returns: Wrapped function that prints subcommand results
    :rtype: callable

    """

    @functools.wraps(function)
    def wrapper(*args, **kwargs):
        result = function(*args, **kwargs)
        context = click.get_current_context()
        params = context.params
        result = with_meta(result, params.get("seed"))
        output_format = params["output_format"]
        formatter = FORMATTERS[output_format]
        if isinstance(formatter, dict):
            # For the text formatter, there's a separate formatter for each subcommand
            formatter = formatter[context.command.name]

        output = formatter(result, params.get("verbose", False)).strip("\n")
        output_file = params.get("output_file")
        if output_file is None:
            click.echo(output)
            return
        try:
            with click.open_file(output_file, mode="w") as output_stream:
                click.echo(output, file=output_stream)
        except (OSError, IOError) as exception:
            LOGGER.error("I/O error: %s", exception)
            context.exit(3)

    return wrapper


def handle_exceptions(function):
    """Print error and exit with a code that tells failures apart.

    2 for precondition violations, 3 for unreadable input, 1 when a
    constructive search gives up.

    :param function: Subcommand that returns a result record.
    :type function: callable
    :returns: Wrapped function that prints subcommand results
    :rtype: callable

    """

    @functools.wraps(function)
    def wrapper(*args, **kwargs):
        try:
            return function(*args, **kwargs)
        except TensorFileError as exception:
            LOGGER.error("Input error: %s", exception)
            click.get_current_context().exit(3)
        except (OSError, IOError) as exception:
            LOGGER.error("I/O error: %s", exception)
            click.get_current_context().exit(3)
        except ConstructionFailure as exception:
            LOGGER.error("Construction failed: %s", exception)
            click.get_current_context().exit(1)
        except ValueError as exception:
            LOGGER.error("Precondition error: %s", exception)
            click.get_current_context().exit(2)

    return wrapper


def pass_config(function):
    """Load configuration, fill unset options from it and pass it to subcommand.

    :param function: Subcommand that returns a result record.
    :type function: callable
    :returns: Wrapped function that receives the configuration first
    :rtype: callable

    """

    @functools.wraps(function)
    def wrapper(*args, **kwargs):
        context = click.get_current_context()
        config = load_config()
        for key in CONFIG_OPTIONS:
            if key in kwargs and kwargs[key] is None:
                kwargs[key] = config[key]
                # echo_result reads the seed back from the context
                context.params[key] = config[key]
        for key in CONFIG_OPTIONS + ("field",):
            if kwargs.get(key) is not None:
                config[key] = kwargs[key]
        return function(config, *args, **kwargs)

    return wrapper


def output_options(function):
    """Options shared by every subcommand that prints a record."""
    function = click.option("-v", "--verbose", count=True, help="Verbose output")(
        function
    )
    function = click.option(
        "-f",
        "--format",
        "output_format",
        type=click.Choice(OUTPUT_FORMATS),
        default="json",
        help="Output format",
    )(function)
    function = click.option(
        "-o",
        "--output",
        "--out",
        "output_file",
        type=click.Path(dir_okay=False),
        help="Output file",
    )(function)
    function = click.option("-s", "--seed", type=click.INT, help="Random seed")(
        function
    )
    return click.option(
        "--field", type=click.Choice(FIELDS), help="Field the analysis runs over"
    )(function)


def tensor_command(function):
    """Decorator that groups decorators common to subcommands reading a tensor."""

    @click.command()
    @click.option(
        "-i",
        "--input",
        "input_file",
        type=click.Path(dir_okay=False),
        help="JSON tensor file",
    )
    @click.option(
        "-t", "--tensor", callback=tensor_parameter, help="Inline JSON tensor"
    )
    @click.option(
        "-e",
        "--example",
        "example_name",
        type=click.Choice(sorted(EXAMPLES)),
        help="Built-in example tensor",
    )
    @output_options
    @pass_config
    @click.pass_context
    @echo_result
    @handle_exceptions
    @functools.wraps(function)
    def wrapper(*args, **kwargs):
        return function(*args, **kwargs)

    return wrapper


def verify_option(function):
    """Add ``--verify FILE`` to re-check a stored decomposition instead."""
    return click.option(
        "--verify",
        "verify_file",
        type=click.Path(dir_okay=False),
        help="Recompute the residual of a decomposition from a previous output",
    )(function)
