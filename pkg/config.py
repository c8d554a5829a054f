"""
Project-wide settings for the PageRank discrepancy toolkit.
"""
import logging
import sys

LOGGER_PREFIX = "pagerank"
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

# Floats in CSV output; 17 significant digits always parse back to the same double.
CSV_SIGNIFICANT_DIGITS = 17


def setup_logging(verbosity: int = 0) -> logging.Logger:
    """
    Configure stderr logging for command-line runs.

    Args:
        verbosity: 0 for warnings only, 1 for info, 2 or more for debug

    Returns:
        The project root logger
    """
    if verbosity >= 2:
        level = logging.DEBUG
    elif verbosity == 1:
        level = logging.INFO
    else:
        level = logging.WARNING
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)
    root = logging.getLogger(LOGGER_PREFIX)
    root.setLevel(level)
    return root
