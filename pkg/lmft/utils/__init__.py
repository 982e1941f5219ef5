from . import constants
from . import errors
from .logging import logger
