"""Package exception hierarchy.

The CLI maps each class to a distinct exit code, so raising the right
type is part of the contract, not just diagnostics.
"""


class ElastowaveError(Exception):
    """Base class for all solver errors."""


class MeshFormatError(ElastowaveError):
    """Malformed mesh file: unknown section, bad id, wrong arity."""


class GeometryError(ElastowaveError):
    """Invalid geometry: inverted element, unsupported interface layout,
    untagged outer face, point outside the domain."""


class ConfigError(ElastowaveError):
    """Invalid or unparseable scenario configuration."""


class DivergenceError(ElastowaveError):
    """Non-finite state detected during time integration."""
