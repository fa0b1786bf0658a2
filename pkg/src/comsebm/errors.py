class ComsError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(ComsError, ValueError):
    """Invalid hyperparameters, dimensions or flag combinations."""


class InputError(ComsError, ValueError):
    """Non-finite or wrongly shaped numeric input."""


class DatasetFormatError(ComsError, ValueError):
    """A dataset or samples file does not follow its JSON schema."""

    def __init__(self, message: str, index: int | None = None):
        self.index = index
        if index is not None:
            message = f"record {index}: {message}"
        super().__init__(message)


class SamplerDiverged(ComsError, RuntimeError):
    """An MCMC / ascent chain produced a non-finite iterate."""

    def __init__(self, step: int, chain: int | None = None, where: str = ""):
        self.step = step
        self.chain = chain
        msg = f"sampler diverged at step {step}"
        if chain is not None:
            msg += f" (chain {chain})"
        if where:
            msg += f" during {where}"
        super().__init__(msg)
