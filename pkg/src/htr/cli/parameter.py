"""Command line parameter types."""

import json

import click

from htr.core import MODE_LETTERS
from htr.util import validate_restarts


def tensor_parameter(_context, _parameter, value):
    """Tensor document passed inline as JSON text.

    Either a mapping with ``order``, ``field`` and ``data`` keys or a bare
    list of entries in flat-offset order.

    :param value: JSON text
    :type value: str
    :raises click.BadParameter: when the text is not valid JSON

    """
    if value is None:
        return None
    try:
        document = json.loads(value)
    except ValueError:
        raise click.BadParameter(value)
    if not isinstance(document, (dict, list)):
        raise click.BadParameter(value)
    return document


def permutation_parameter(_context, _parameter, values):
    """Mode permutations passed as letters (``kjil``) or indices (``2,1,0,3``).

    :param values: Permutation values
    :type values: tuple
    :raises click.BadParameter: when a value mixes or repeats modes

    """
    permutations = []
    for value in values:
        if "," in value:
            try:
                permutation = tuple(int(item) for item in value.split(","))
            except ValueError:
                raise click.BadParameter(value)
        else:
            if any(letter not in MODE_LETTERS[:4] for letter in value):
                raise click.BadParameter(value)
            permutation = tuple(MODE_LETTERS.index(letter) for letter in value)
        if sorted(permutation) != [0, 1, 2, 3]:
            raise click.BadParameter(value)
        permutations.append(permutation)
    return permutations


def restarts_parameter(_context, _parameter, value):
    """Restart count, left unset so the configuration default applies.

    :raises click.BadParameter: when the count is not positive

    """
    if value is None:
        return None
    try:
        validate_restarts(value)
    except ValueError:
        raise click.BadParameter(str(value))
    return value
