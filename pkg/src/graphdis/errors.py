"""Shared exception types."""


class GraphDisError(Exception):
    """Base class for all graphdis errors."""


class ValidationError(GraphDisError):
    """A value violates a documented bound or invariant."""


class CapacityError(GraphDisError):
    """A graph does not fit the configured padding size."""


class ShapeError(GraphDisError):
    """Tensor shapes are incompatible for the requested operation."""


class NonFiniteError(GraphDisError):
    """A numerical operation produced NaN or infinity."""


class CheckpointError(GraphDisError):
    """A checkpoint file is missing, corrupt, or of an unknown version."""


class TrainingDiverged(GraphDisError):
    """Training hit a non-finite loss; carries the offending epoch and batch."""

    def __init__(self, epoch: int, batch: int, message: str = ""):
        self.epoch = epoch
        self.batch = batch
        super().__init__(message or f"non-finite loss at epoch {epoch}, batch {batch}")
