"""Exception types shared across the package."""


class NetpbmError(IOError):
    """Raised for unreadable, unsupported, or malformed image files."""


class DegenerateError(ValueError):
    """Three points are collinear or coincident: no unique circle exists."""


class IndexOutOfRangeError(LookupError):
    """Candidate index falls outside the edge-point range [1, Np]."""


class RadiusTooSmallError(ValueError):
    """Circle radius rounds below the minimum rasterizable radius of 1."""


class InsufficientEdgesError(ValueError):
    """Edge map has fewer than the three points needed to form a circle."""


class PlacementError(ValueError):
    """A synthetic circle does not fit inside the image with its margin."""


class ConfigError(ValueError):
    """Invalid optimizer or detector configuration."""
