"""Exception types shared across the package."""


class PoleHit(ValueError):
    """Evaluation point coincides with a pole of a partial-fraction sum."""


class Degenerate(ValueError):
    """Input has no well-defined zero set (e.g. identically zero target)."""


class SizeExceeded(ValueError):
    """Input dimension exceeds a desk-scale guard."""


class BadSpec(ValueError):
    """Invalid sampler or measure parameters."""


class OffCircle(ValueError):
    """Atoms are required on the unit circle but are not."""


class BadManifest(ValueError):
    """Experiment manifest failed validation."""


class NoConvergence(RuntimeError):
    """An iterative solver ran out of budget.

    ``partial`` carries whatever the solver had when it stopped and ``stage``
    the iteration stage (when raised from an operator pipeline).
    """

    def __init__(self, message, partial=None, stage=None):
        super().__init__(message)
        self.partial = partial
        self.stage = stage
