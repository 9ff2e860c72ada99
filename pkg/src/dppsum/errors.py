"""Exception types shared across the package."""


class NumericError(RuntimeError):
    """A linear-algebra routine failed beyond the allowed jitter retry."""


class TrainingDivergedError(NumericError):
    """Training hit a non-finite likelihood or gradient."""

    def __init__(self, epoch: int, message: str):
        super().__init__(f"epoch {epoch}: {message}")
        self.epoch = epoch


class InvalidSimilarityError(ValueError):
    """A similarity matrix violates PSD beyond slack; project it first."""


class ClusterFormatError(ValueError):
    """A cluster JSONL file is malformed or violates an invariant."""


class TableFormatError(ValueError):
    """A binary embedding/similarity file is malformed."""


class ConfigurationError(ValueError):
    """Inputs are inconsistent with the requested feature mode."""
