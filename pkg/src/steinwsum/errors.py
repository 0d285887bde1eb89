class DomainError(ValueError):
    """A parameter lies outside the domain of its distribution or formula."""


class PreconditionError(ValueError):
    """The inputs are valid on their own but violate an operation's precondition."""


class ConfigError(ValueError):
    """A model configuration file could not be parsed."""
