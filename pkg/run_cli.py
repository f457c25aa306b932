#!/usr/bin/env python3
"""
Launch script for the coreforge command line
"""

import os
import sys

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from cli.commands import main  # noqa: E402
from logging_config import get_logger  # noqa: E402

logger = get_logger(__name__)


if __name__ == '__main__':
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        print("\n\nInterrupted.")
        logger.info("Run interrupted by user")
        sys.exit(130)
