"""CLI main command test cases."""

import pytest
from click.testing import CliRunner

from htr.cli import SUBCOMMAND_FUNCTIONS, main


class TestMain(object):
    """Main command tests."""

    @pytest.mark.parametrize("help_option", ("-h", "--help"))
    def test_help(self, help_option):
        """Usage string is printed."""
        runner = CliRunner()
        result = runner.invoke(main, help_option)

        assert result.exit_code == 0
        assert "Usage:" in result.output

    def test_subcommands_registered(self):
        """Every subcommand is reachable from the group."""
        names = {command.name for command in SUBCOMMAND_FUNCTIONS}
        assert names == {
            "bound",
            "certify",
            "delta",
            "help",
            "profile",
            "rank222",
            "sample",
            "setup",
            "version",
        }
        assert set(main.commands) == names
