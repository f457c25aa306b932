"""
CLI package for coreforge
"""

from .run_manager import ExitCode, RunManager, load_instance, reference_value
from .commands import build_parser, main

__all__ = [
    'ExitCode',
    'RunManager',
    'load_instance',
    'reference_value',
    'build_parser',
    'main'
]
