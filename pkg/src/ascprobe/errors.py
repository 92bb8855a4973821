"""Domain exceptions and warnings.

Everything user-facing derives from AscprobeError so the CLI can map domain
failures to exit code 2 (environment/IO failures stay OSError -> exit 1).
"""


class AscprobeError(Exception):
    """Base class for domain errors."""


# corpus
class InsufficientCombinations(AscprobeError):
    """A construction class cannot yield the requested number of distinct sentences."""


class EmptyCorpus(AscprobeError):
    """Operation requires a non-empty corpus."""


class DegenerateSplit(AscprobeError):
    """A stratified split would leave some class empty on one side."""


# rnn
class TokenOutOfRange(AscprobeError):
    """A token id is outside the embedding table."""


class NonFiniteLoss(AscprobeError):
    """Training produced a NaN/inf loss; carries the offending epoch/batch."""

    def __init__(self, epoch: int, batch: int):
        super().__init__(f"non-finite loss at epoch {epoch}, batch {batch}")
        self.epoch = epoch
        self.batch = batch


class CheckpointError(AscprobeError):
    """Checkpoint file is malformed, has a wrong version, or a mismatched manifest."""


# probe
class EmptySentence(AscprobeError):
    """Sentence has no real timestep to pool over."""


class VocabMismatch(AscprobeError):
    """Checkpoint and corpus disagree on vocabulary size."""


# geometry
class AllDimensionsConstant(AscprobeError):
    """Every dimension has zero variance; z-scoring is undefined."""


class UndefinedIntraClass(AscprobeError):
    """A class is a singleton, so its mean intra-class distance is undefined."""


class EigenFailure(AscprobeError):
    """Symmetric eigendecomposition did not converge."""


class PerplexityTooHigh(AscprobeError):
    """t-SNE perplexity must satisfy 1 < perplexity < N."""


class NonFiniteGradient(AscprobeError):
    """t-SNE gradient became NaN/inf."""


class CalibrationFailure(UserWarning):
    """Bandwidth bisection hit its iteration cap; best sigma returned anyway."""
