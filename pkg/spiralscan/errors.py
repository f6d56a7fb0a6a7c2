"""
This module provides the exceptions raised by spiralscan.

"""


class SpiralScanError(Exception):
    """
    Base exception class for all spiralscan errors.
    """


class InvalidGridError(SpiralScanError):
    """
    Exception raised for invalid grid dimensions, feature maps or sequences.
    """


class InvalidScanOrder(SpiralScanError):
    """
    Exception raised when an array is not a valid permutation of the grid cells.
    """


class DimensionMismatch(SpiralScanError):
    """
    Exception raised when two operands disagree on dimensions, channels or length.
    """


class InvalidMatchConfig(SpiralScanError):
    """
    Exception raised for matching or spiral parameters out of their valid ranges.
    """


class InvalidScanSpecification(SpiralScanError):
    """
    Exception raised for an invalid scan specification.
    """


class GeometryError(SpiralScanError):
    """
    Exception raised when a spacing metric is undefined for the given points.
    """


class FootprintError(SpiralScanError):
    """
    Exception raised for an impossible footprint request.
    """


class FileFormatError(SpiralScanError):
    """
    Exception raised for unreadable or corrupt files.
    """


class TruncatedFileError(FileFormatError):
    """
    Exception raised when a file is shorter than its header announces.
    """


class ReportSchemaError(FileFormatError):
    """
    Exception raised when a report does not follow the report schema.
    """
