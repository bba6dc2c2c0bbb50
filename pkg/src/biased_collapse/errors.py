"""Exception hierarchy. Everything raised on purpose derives from
:class:`BiasedCollapseError` so the CLI can map it to an exit status."""


class BiasedCollapseError(Exception):
    pass


class DimensionError(BiasedCollapseError, ValueError):
    pass


class InvalidOperatorError(BiasedCollapseError, ValueError):
    """A matrix failed validation; ``reason`` names the violated invariant
    (``not-hermitian``, ``not-positive``, ``trace-not-one``,
    ``not-idempotent``, ``not-unitary``, ``not-orthogonal``,
    ``not-complete``)."""

    def __init__(self, reason: str, detail: str = ""):
        self.reason = reason
        super().__init__(f"{reason}: {detail}" if detail else reason)


class ZeroProbabilityError(BiasedCollapseError, ValueError):
    pass


class ImpossibleOutcomeError(BiasedCollapseError, ValueError):
    pass


class NonCommutingError(BiasedCollapseError, ValueError):
    pass


class ZeroConditioningError(BiasedCollapseError, ValueError):
    pass


class ZeroTraceError(BiasedCollapseError, ValueError):
    pass


class StageError(BiasedCollapseError, IndexError):
    pass


class UnknownSettingError(BiasedCollapseError, KeyError):
    pass
