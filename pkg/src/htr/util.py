"""Utility functions."""
import logging
import os

from six.moves.configparser import ConfigParser

CONFIG_FILE = os.path.expanduser(os.path.join("~", ".config", "htr", "config"))
LOGGER = logging.getLogger(__name__)

FIELDS = ("real", "complex")
METHODS = ("nelder-mead", "bfgs")

# Relative tolerances shared across modules
DELTA_RTOL = 1e-9
# Linear quantities near the Delta = 0 stratum scale like sqrt(Delta)
STRATUM_RTOL = 1e-3
RANK_ONE_RTOL = 1e-9
GL_RTOL = 1e-12
SINGULAR_M_RTOL = 1e-10
RESIDUAL_RTOL = 1e-8

TOLERANCES = {
    "delta_rtol": DELTA_RTOL,
    "stratum_rtol": STRATUM_RTOL,
    "rank_one_rtol": RANK_ONE_RTOL,
    "gl_rtol": GL_RTOL,
    "singular_m_rtol": SINGULAR_M_RTOL,
    "residual_rtol": RESIDUAL_RTOL,
}

DEFAULT_CONFIG = {
    "seed": 0,
    "restarts": 1000,
    "method": "nelder-mead",
    "floor": 1e-3,
    "min_restarts": 100,
    "workers": 1,
    "field": "real",
    "certificate_tol": 1e-6,
}

INTEGER_KEYS = ("seed", "restarts", "min_restarts", "workers")
FLOAT_KEYS = ("floor", "certificate_tol")
STRING_KEYS = ("method", "field")


def load_config():
    """Load configuration.

    :returns:
        Current configuration based on configuration file and environment variables.
    :rtype: dict

    """
    config_parser = ConfigParser(
        {key: str(value) for key, value in DEFAULT_CONFIG.items()}
    )
    config_parser.add_section("htr")

    if os.path.isfile(CONFIG_FILE):
        LOGGER.debug("Parsing configuration file: %s...", CONFIG_FILE)
        with open(CONFIG_FILE) as config_file:
            config_parser.read_file(config_file)
    else:
        LOGGER.debug("Configuration file not found: %s", CONFIG_FILE)

    for key in DEFAULT_CONFIG:
        variable = "HTR_{}".format(key.upper())
        if variable not in os.environ:
            continue
        value = os.environ[variable]
        converter = int if key in INTEGER_KEYS else float if key in FLOAT_KEYS else str
        try:
            converter(value)
        except ValueError:
            LOGGER.error(
                "%s environment variable cannot be converted to %s: %r",
                variable,
                converter.__name__,
                value,
            )
            continue
        LOGGER.debug("%s found in environment variable: %s", key, value)
        # Environment variable takes precedence over configuration file content
        config_parser.set("htr", key, value)

    config = {}
    for key in INTEGER_KEYS:
        config[key] = config_parser.getint("htr", key)
    for key in FLOAT_KEYS:
        config[key] = config_parser.getfloat("htr", key)
    for key in STRING_KEYS:
        config[key] = config_parser.get("htr", key)
    return config


def save_config(config):
    """Save configuration.

    :param config: Data to be written to the configuration file.
    :type config:  dict

    """
    config_parser = ConfigParser()
    config_parser.add_section("htr")
    for key in DEFAULT_CONFIG:
        config_parser.set("htr", key, str(config[key]))

    config_dir = os.path.dirname(CONFIG_FILE)
    if not os.path.isdir(config_dir):
        os.makedirs(config_dir)

    with open(CONFIG_FILE, "w") as config_file:
        config_parser.write(config_file)


def validate_field(field):
    """Check if the field tag is valid.

    :param field: Field tag to validate.
    :type field: str
    :raises ValueError: When the tag is neither ``real`` nor ``complex``.

    """
    if field not in FIELDS:
        raise ValueError("Field must be one of {}: {!r}".format(FIELDS, field))
    return True


def validate_method(method):
    """Check if the local minimization method is supported.

    :param method: Method name.
    :type method: str

    """
    if method not in METHODS:
        raise ValueError("Method must be one of {}: {!r}".format(METHODS, method))
    return True


def validate_restarts(restarts):
    """Check if the restart count is a positive integer.

    :param restarts: Number of restarts.
    :type restarts: int

    """
    if isinstance(restarts, bool) or not isinstance(restarts, int) or restarts < 1:
        raise ValueError("Restarts must be a positive integer: {!r}".format(restarts))
    return True
