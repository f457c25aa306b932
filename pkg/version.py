"""
coreforge version information
The package version, and the layout version stamped into run records and certificate files
"""

# MAJOR.MINOR.PATCH; MAJOR changes when a program's variables or rows change meaning
VERSION_MAJOR = 0
VERSION_MINOR = 1
VERSION_PATCH = 0

VERSION = f"{VERSION_MAJOR}.{VERSION_MINOR}.{VERSION_PATCH}"

# JSON layout of run records (increment the major part when a key is renamed or removed)
RECORD_VERSION = "1.0"

BUILD_DATE = "2026-10-18"


def get_full_version_string():
    """Version with build date, as printed by --version"""
    return f"v{VERSION} (Built: {BUILD_DATE})"


def is_record_compatible(record_version: str) -> bool:
    """
    Check if a run record can be read by this version.

    Args:
        record_version: "version" field of the file

    Returns:
        True if the major record version matches
    """
    try:
        return str(record_version).split(".")[0] == RECORD_VERSION.split(".")[0]
    except (ValueError, AttributeError):
        return False
