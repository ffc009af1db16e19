"""Helper functions to reduce subcommand duplication."""

import json
import logging
import sys

import click

from htr.core import Decomposition, Tensor, as_tensor, scalar_from_json
from htr.exceptions import OrderMismatch, PreconditionError, TensorFileError
from htr.sampling import example
from htr.util import RESIDUAL_RTOL, load_config

LOGGER = logging.getLogger(__name__)


def read_document(path):
    """Read a JSON document from ``path`` (``-`` for stdin).

    :raises TensorFileError: when the file cannot be opened or parsed.

    """
    try:
        with click.open_file(path) as input_file:
            return json.load(input_file)
    except (OSError, IOError) as exception:
        raise TensorFileError("Cannot read {!r}: {}".format(path, exception))
    except ValueError as exception:
        raise TensorFileError("Invalid JSON in {!r}: {}".format(path, exception))


def tensor_from_document(document):
    """Tensor from a ``{"order", "field", "data"}`` mapping or a flat entry list."""
    if isinstance(document, dict) and "tensor" in document:
        document = document["tensor"]
    if isinstance(document, list):
        try:
            values = [scalar_from_json(value) for value in document]
            field = "complex" if any(isinstance(v, complex) for v in values) else "real"
            return Tensor.from_flat(values, field=field)
        except (TypeError, ValueError) as exception:
            raise TensorFileError("Malformed entry list: {}".format(exception))
    if not isinstance(document, dict):
        raise TensorFileError("Tensor document must be a mapping or a list")
    return Tensor.from_dict(document)


def get_tensor(context, input_file, tensor, example_name, field, order=None):
    """Get the tensor passed inline, by example name or via input file.

    Standard input is read when no source is given and it is not a terminal.
    Without a field, complex tensors are analysed over the complex numbers
    and real ones over the configured field.

    :param context: Subcommand context
    :type context: click.Context
    :param input_file: Path of a JSON tensor file
    :type input_file: str | None
    :param tensor: Parsed inline document
    :type tensor: dict | list | None
    :param example_name: Name of a built-in example
    :type example_name: str | None
    :param field: Field the analysis runs over, ``None`` to infer it
    :type field: str | None
    :param order: Required order, if any
    :type order: int | None
    :returns: The tensor and the field to use.
    :rtype: tuple

    """
    sources = [source for source in (input_file, tensor, example_name) if source]
    if len(sources) > 1:
        raise PreconditionError(
            "Pass only one of -i/--input, -t/--tensor and -e/--example"
        )

    if input_file is None and tensor is None and example_name is None:
        if sys.stdin.isatty():
            output = [
                context.command.get_usage(context),
                (
                    "Error: a tensor must be passed through the -i/--input, "
                    "-t/--tensor or -e/--example option or through a shell pipe."
                ),
            ]
            click.echo("\n\n".join(output))
            context.exit(2)
        input_file = "-"

    if example_name is not None:
        result = example(example_name)
    elif tensor is not None:
        result = tensor_from_document(tensor)
    else:
        result = tensor_from_document(read_document(input_file))

    if order is not None and result.order != order:
        raise OrderMismatch(
            "{} needs an order-{} tensor, got order {}".format(
                context.command.name, order, result.order
            )
        )
    if field is None:
        field = "complex" if result.field == "complex" else load_config()["field"]
    if field == "complex" and result.field == "real":
        result = result.to_complex()
    elif field == "real" and result.field == "complex":
        raise PreconditionError("Complex tensor cannot be analysed over the reals")
    LOGGER.debug("Loaded tensor of order %d (%s)", result.order, result.field)
    return result, field


def verify_decomposition(tensor, path):
    """Recompute the residual of a decomposition stored in a previous output.

    :param tensor: Tensor the decomposition claims to reproduce
    :type tensor: htr.core.Tensor
    :param path: JSON file with a ``decomposition`` entry, or the decomposition itself
    :type path: str
    :rtype: dict

    """
    document = read_document(path)
    if isinstance(document, dict) and "decomposition" in document:
        document = document["decomposition"]
    if document is None:
        raise TensorFileError("{!r} holds no decomposition".format(path))
    decomposition = Decomposition.from_dict(document)
    tensor = as_tensor(tensor)
    residual = decomposition.residual(tensor)
    threshold = RESIDUAL_RTOL * max(1.0, tensor.norm())
    LOGGER.debug("Verified residual %.3g against threshold %.3g", residual, threshold)
    return {
        "verified": residual <= threshold,
        "terms": len(decomposition),
        "residual": residual,
        "threshold": threshold,
    }
