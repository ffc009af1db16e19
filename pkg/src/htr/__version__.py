__author__ = "htr developers"
__copyright__ = "Copyright, htr developers"
__credits__ = ["htr developers"]
__license__ = "MIT"
__maintainer__ = "htr developers"
__email__ = "htr-dev@users.noreply.github.com"
__status__ = "BETA"
__version__ = "0.1.0"
