"""Exception hierarchy shared by both engines, the experiments and the CLI."""


class ChainSimError(Exception):
    """Base class for every error raised by chainsim."""


class InvalidChainError(ChainSimError, ValueError):
    """Chain geometry or coupling table is malformed."""


class InvalidStateError(ChainSimError, ValueError):
    """Deviation state refers to spins outside the chain or carries no weight."""


class InvalidInputError(ChainSimError, ValueError):
    """Operator arguments are inconsistent (dimension mismatch, asymmetric table, ...)."""


class UnsupportedModelError(ChainSimError, ValueError):
    """The analytic engine was asked for a model it cannot solve in closed form."""


class ResourceLimitError(ChainSimError):
    """Dense oracle request exceeds the configured spin cap."""


class AliasingError(ChainSimError, ValueError):
    """Too few phase steps to separate the requested coherence orders."""


class CrossCheckError(ChainSimError):
    """Analytic and oracle engines disagree beyond tolerance."""


class ConfigError(ChainSimError, ValueError):
    """Run configuration failed to parse or validate.

    ``problems`` lists every violation found, not only the first.
    """

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
