"""
Configuration module for coreforge
Loads solver, output and logging settings from environment variables with sensible defaults
"""

import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables from .env file if it exists
load_dotenv()

# Base directory of the project
BASE_DIR = Path(__file__).parent.absolute()


def _optional_float(value):
    """Parse an optional float setting; empty or zero means unset"""
    if value is None or value.strip() == '':
        return None
    parsed = float(value)
    return parsed if parsed > 0 else None


class Config:
    """Application configuration"""

    # Solver Configuration
    SOLVER = os.getenv('CORE_FORGE_SOLVER', 'highs')
    TOLERANCE = float(os.getenv('CORE_FORGE_TOLERANCE', '1e-4'))
    TIME_LIMIT = _optional_float(os.getenv('CORE_FORGE_TIMEOUT'))
    THREADS = int(os.getenv('CORE_FORGE_THREADS', '0'))  # 0 = solver default
    SEED = int(os.getenv('CORE_FORGE_SEED', '0'))

    # Largest denominator used when turning solver floats into fractions
    DENOMINATOR_CAP = int(os.getenv('CORE_FORGE_DENOMINATOR_CAP', '1000000'))

    # Logging Configuration
    LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO')
    LOG_FILE = os.getenv('LOG_FILE', 'logs/coreforge.log')
    LOG_MAX_BYTES = int(os.getenv('LOG_MAX_BYTES', '10485760'))  # 10MB default
    LOG_BACKUP_COUNT = int(os.getenv('LOG_BACKUP_COUNT', '5'))

    # Run records, distributions, certificates and exported models
    OUTPUT_DIR = os.getenv('CORE_FORGE_OUTPUT_DIR', 'runs')

    # Long-running searches in the test suite
    SLOW_TESTS = os.getenv('CORE_FORGE_SLOW_TESTS', '').lower() in ('true', '1', 'yes')

    # Application Info
    APP_NAME = os.getenv('APP_NAME', 'coreforge')

    @classmethod
    def get_abs_path(cls, relative_path):
        """Convert relative path to absolute path from project root"""
        return BASE_DIR / relative_path

    @classmethod
    def ensure_directories(cls):
        """Ensure required directories exist"""
        log_dir = cls.get_abs_path(Path(cls.LOG_FILE).parent)
        log_dir.mkdir(parents=True, exist_ok=True)

    def __repr__(self):
        return (
            f"Config(SOLVER={self.SOLVER}, "
            f"TOLERANCE={self.TOLERANCE}, "
            f"TIME_LIMIT={self.TIME_LIMIT}, "
            f"THREADS={self.THREADS}, "
            f"SEED={self.SEED}, "
            f"LOG_LEVEL={self.LOG_LEVEL})"
        )


# Global config instance
config = Config()

# Ensure directories exist on import
config.ensure_directories()
