"""polarbench: polar codes for channel coding, lossless compression and quantization."""

__version__ = "0.1.0"

from loguru import logger

from .channels import ChannelParam, SoftBlock
from .config import Config
from .construction import CodeSpec, construct_arikan, construct_rm, dual_code, encode
from .exceptions import ConfigError, InvalidInputError, OracleRefusedError, PolarBenchError

# Library stays silent until an application calls configure_logging
logger.disable("polarbench")

__all__ = [
    "ChannelParam",
    "CodeSpec",
    "Config",
    "ConfigError",
    "InvalidInputError",
    "OracleRefusedError",
    "PolarBenchError",
    "SoftBlock",
    "construct_arikan",
    "construct_rm",
    "dual_code",
    "encode",
]
