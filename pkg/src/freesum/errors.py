"""Exception types shared across the package."""


class SizeLimitError(ValueError):
    """An enumeration or expansion would exceed a configured size cap."""


class CapacityError(ValueError):
    """A law does not store enough moments for the requested computation."""
