class ConfigError(ValueError):
    """Invalid scenario, topology or fixture input."""


class FormationError(RuntimeError):
    """DODAG formation could not attach any node to the root."""
