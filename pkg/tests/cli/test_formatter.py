# coding=utf-8
"""Formatter test cases."""

import textwrap

import numpy as np
import pytest

from htr.cli.formatter import (
    ANSI_MARKUP,
    FORMATTERS,
    csv_formatter,
    delta_formatter,
    json_formatter,
    rank222_formatter,
    to_builtin,
    xml_formatter,
)

EXAMPLE_DELTA = {
    "field": "real",
    "delta": -4.0,
    "delta_sign": "negative",
    "theta": -2.0,
    "dot": 0.0,
    "nonsingular": True,
    "tolerance": 1e-9,
    "meta": {"seed": 0, "version": "<version>", "tolerances": {}},
}

EXAMPLE_DELTA_OUTPUT = ANSI_MARKUP.parse(
    textwrap.dedent(
        """\
        <header>Hyperdeterminant (real)</header>
        <key>Delta</key>: <negative>-4.0</negative> (negative)
        <key>Theta</key>: <value>-2.0</value>
        <key>Dot</key>: <value>0.0</value>
        <key>Nonsingular pair</key>: <value>yes</value>"""
    )
)

EXAMPLE_DELTA_VERBOSE_OUTPUT = ANSI_MARKUP.parse(
    textwrap.dedent(
        """\
        <header>Hyperdeterminant (real)</header>
        <key>Delta</key>: <negative>-4.0</negative> (negative)
        <key>Theta</key>: <value>-2.0</value>
        <key>Dot</key>: <value>0.0</value>
        <key>Nonsingular pair</key>: <value>yes</value>
        <key>Tolerance</key>: <value>1e-09</value>
        <key>Seed</key>: <value>0</value>
        <key>Version</key>: <value><version></value>"""
    )
)

EXAMPLE_VERIFY = {"verified": False, "terms": 3, "residual": 1.0, "threshold": 1e-8}

EXAMPLE_VERIFY_OUTPUT = ANSI_MARKUP.parse(
    textwrap.dedent(
        """\
        <header>Decomposition check</header>
        <key>Result</key>: <failed>failed</failed>
        <key>Terms</key>: <value>3</value>
        <key>Residual</key>: <value>1.000e+00</value> (threshold 1.000e-08)"""
    )
)


class TestJSONFormatter(object):
    """JSON formatter tests."""

    def test_json_format(self):
        """Format to json."""
        assert json_formatter({"a": "result"}, _verbose=False) == textwrap.dedent(
            """\
            {
                "a": "result"
            }"""
        )

    def test_numpy_values(self):
        """Numpy scalars and arrays become plain values."""
        result = {"b": np.array([1, 2]), "a": np.int64(3)}
        assert json_formatter(result, _verbose=False) == textwrap.dedent(
            """\
            {
                "a": 3,
                "b": [
                    1,
                    2
                ]
            }"""
        )


class TestXMLFormatter(object):
    """XML formatter tests."""

    def test_xml_format(self):
        """Format to xml."""
        assert xml_formatter({"a": "result"}, _verbose=False) == textwrap.dedent(
            """\
            <?xml version="1.0" ?>
            <root>
               <a>result</a>
            </root>"""
        )

    def test_numpy_values(self):
        """Numpy values are written as numbers."""
        output = xml_formatter({"rank": np.int64(3)}, _verbose=False)
        assert "<rank>3</rank>" in output


class TestCSVFormatter(object):
    """CSV formatter tests."""

    def test_rows(self):
        """Sampling rows keep the column order."""
        result = {
            "columns": ["index", "rank"],
            "rows": [{"index": 0, "rank": 2}, {"index": 1, "rank": 3}],
        }
        assert csv_formatter(result, _verbose=False) == "index,rank\n0,2\n1,3\n"

    def test_key_value(self):
        """Other records become key,value rows followed by their metadata."""
        result = {
            "rank": 3,
            "field": "real",
            "terms": [[1.0, 0.0]],
            "meta": {"seed": 1, "version": "<version>", "tolerances": {"rtol": 1e-9}},
        }
        assert csv_formatter(result, _verbose=False) == textwrap.dedent(
            """\
            key,value
            field,real
            rank,3
            seed,1
            version,<version>
            rtol,1e-09
            """
        )


class TestToBuiltin(object):
    """Numpy conversion tests."""

    @pytest.mark.parametrize(
        "value, expected",
        [(np.float64(0.5), 0.5), (np.bool_(True), True), (np.eye(2), [[1, 0], [0, 1]])],
    )
    def test_conversion(self, value, expected):
        """Numpy values are converted."""
        assert to_builtin(value) == expected

    def test_unknown(self):
        """Other objects are refused."""
        with pytest.raises(TypeError):
            to_builtin(object())


class TestTextFormatters(object):
    """Text formatter tests."""

    @pytest.mark.parametrize(
        "verbose, expected",
        [(False, EXAMPLE_DELTA_OUTPUT), (True, EXAMPLE_DELTA_VERBOSE_OUTPUT)],
    )
    def test_delta(self, verbose, expected):
        """Hyperdeterminant record."""
        assert delta_formatter(EXAMPLE_DELTA, verbose) == expected

    def test_verify(self):
        """Verification records use their own template."""
        assert rank222_formatter(EXAMPLE_VERIFY, False) == EXAMPLE_VERIFY_OUTPUT

    def test_every_command_has_text_output(self):
        """Text formatters exist for every record-producing subcommand."""
        assert sorted(FORMATTERS["txt"]) == [
            "bound",
            "certify",
            "delta",
            "profile",
            "rank222",
            "sample",
        ]
