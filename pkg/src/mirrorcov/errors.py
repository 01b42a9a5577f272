"""Exception types shared across the package."""


class MirrorcovError(Exception):
    """Base class for all package errors."""


class InvalidGeometryError(MirrorcovError):
    """Degenerate geometric input (coincident endpoints, zero-area polygon...)."""


class InvalidSceneError(MirrorcovError):
    """Scene violates a structural invariant (camera outside free space...)."""


class InvalidArgumentError(MirrorcovError):
    """Argument outside its documented domain."""


class ValidationError(MirrorcovError):
    """Malformed data in a file or request payload."""


class RegionSourceError(MirrorcovError):
    """A region source cannot resolve regions for the requested image."""
