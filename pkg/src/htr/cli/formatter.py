# coding=utf-8
"""Output formatters."""

from __future__ import print_function

import csv
import functools
import io
import json

import ansimarkup
import colorama
import numpy as np
from dict2xml import dict2xml
from jinja2 import Environment, PackageLoader, select_autoescape

JINJA2_ENV = Environment(
    loader=PackageLoader("htr.cli"),
    autoescape=select_autoescape(disabled_extensions=["txt.j2"]),
)

colorama.init()
DIM = "<dim>"
ANSI_MARKUP = ansimarkup.AnsiMarkup(
    tags={
        "header": ansimarkup.parse("<bold>"),
        "key": ansimarkup.parse("<blue>"),
        "value": ansimarkup.parse("<green>"),
        "negative": ansimarkup.parse("<light-red>"),
        "zero": ansimarkup.parse(DIM),
        "positive": ansimarkup.parse("<light-green>"),
        "nonzero": ansimarkup.parse("<light-green>"),
        "rank4-certified": ansimarkup.parse("<light-green>"),
        "rank5-candidate": ansimarkup.parse("<light-yellow>"),
        "inconclusive": ansimarkup.parse(DIM),
        "verified": ansimarkup.parse("<light-green>"),
        "failed": ansimarkup.parse("<light-red>"),
    }
)


def colored_output(function):
    """Decorator that converts ansi markup into ansi escape sequences.

    :param function: Function that will return text using ansi markup.
    :type function: callable
    :returns: Wrapped function that converts markup into escape sequences.
    :rtype: callable

    """

    @functools.wraps(function)
    def wrapper(*args, **kwargs):
        output = function(*args, **kwargs)
        return ANSI_MARKUP(output)

    return wrapper


def to_builtin(value):
    """Convert numpy scalars and arrays for the json encoder."""
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError("Not serializable: {!r}".format(value))


def json_formatter(result, _verbose):
    """Format result as json."""
    return json.dumps(result, indent=4, sort_keys=True, default=to_builtin)


def xml_formatter(result, _verbose):
    """Format result as xml."""
    # Round trip through json so numpy values become plain python ones
    result = json.loads(json.dumps(result, default=to_builtin))
    xml_formatted = dict2xml(result, wrap="root", indent="   ")

    # dict2xml does not add header, so add header manually
    xml_header = '<?xml version="1.0" ?>'
    return "{}\n{}".format(xml_header, xml_formatted)


def csv_formatter(result, _verbose):
    """Format result as csv.

    Sampling results are written with their frozen column order; other
    results become ``key,value`` rows of their scalar entries.

    """
    output = io.StringIO()
    if "rows" in result:
        writer = csv.DictWriter(
            output, fieldnames=result["columns"], lineterminator="\n"
        )
        writer.writeheader()
        writer.writerows(result["rows"])
        return output.getvalue()

    writer = csv.writer(output, lineterminator="\n")
    writer.writerow(["key", "value"])
    flat = dict(result)
    meta = flat.pop("meta", {})
    for key, value in sorted(flat.items()):
        if isinstance(value, (dict, list)) or value is None:
            continue
        writer.writerow([key, value])
    writer.writerow(["seed", meta.get("seed")])
    writer.writerow(["version", meta.get("version")])
    for key, value in sorted(meta.get("tolerances", {}).items()):
        writer.writerow([key, value])
    return output.getvalue()


def _render(template_name, result, verbose):
    if "verified" in result:
        template_name = "verify.txt.j2"
    template = JINJA2_ENV.get_template(template_name)
    return template.render(result=result, verbose=verbose)


@colored_output
def delta_formatter(result, verbose):
    """Convert delta result into human-readable text."""
    return _render("delta.txt.j2", result, verbose)


@colored_output
def rank222_formatter(result, verbose):
    """Convert order-3 rank result into human-readable text."""
    return _render("rank222.txt.j2", result, verbose)


@colored_output
def bound_formatter(result, verbose):
    """Convert bound result into human-readable text."""
    return _render("bound.txt.j2", result, verbose)


@colored_output
def certify_formatter(result, verbose):
    """Convert certificate search report into human-readable text."""
    return _render("certify.txt.j2", result, verbose)


@colored_output
def profile_formatter(result, verbose):
    """Convert flattening profile into human-readable text."""
    return _render("profile.txt.j2", result, verbose)


@colored_output
def sample_formatter(result, verbose):
    """Convert sampling outcomes into human-readable text."""
    return _render("sample.txt.j2", result, verbose)


FORMATTERS = {
    "json": json_formatter,
    "xml": xml_formatter,
    "csv": csv_formatter,
    "txt": {
        "delta": delta_formatter,
        "rank222": rank222_formatter,
        "bound": bound_formatter,
        "certify": certify_formatter,
        "profile": profile_formatter,
        "sample": sample_formatter,
    },
}
