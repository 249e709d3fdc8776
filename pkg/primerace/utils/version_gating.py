"""
Version Gating Utility for PRIMERACE

Decides whether data written by one package version may be read by another.
Cache and trace files record their writer version; readers accept files
written by the same major.minor release and inside an optional window.
"""

from typing import Optional

from packaging import version


def is_version_enabled(
    current_version: str,
    min_version: Optional[str] = None,
    max_version: Optional[str] = None,
    enabled_versions: Optional[list] = None
) -> bool:
    """
    Check if a version lies inside the given constraints.

    Args:
        current_version: Version to test (e.g., "0.1.0")
        min_version: Minimum version required (inclusive)
        max_version: Maximum version allowed (inclusive)
        enabled_versions: Specific list of accepted versions

    Examples:
        is_version_enabled("0.2.0", min_version="0.1.0")
        is_version_enabled("0.2.0", enabled_versions=["0.2.0", "0.2.1"])
    """
    current = version.parse(current_version)

    if enabled_versions is not None:
        return any(current == version.parse(v) for v in enabled_versions)

    if min_version is not None and current < version.parse(min_version):
        return False

    if max_version is not None and current > version.parse(max_version):
        return False

    return True


def is_compatible_writer(writer_version: str, reader_version: Optional[str] = None) -> bool:
    """
    True when a file written by ``writer_version`` can be read by this release.

    Compatibility means equal (major, minor) and a writer that is not newer
    than the reader. Unparseable versions are incompatible.
    """
    if reader_version is None:
        from primerace import __version__ as reader_version

    try:
        writer = version.parse(writer_version)
        reader = version.parse(reader_version)
    except version.InvalidVersion:
        return False

    if (writer.major, writer.minor) != (reader.major, reader.minor):
        return False
    return is_version_enabled(writer_version, max_version=reader_version)


__all__ = ["is_version_enabled", "is_compatible_writer"]
