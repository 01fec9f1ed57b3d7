"""
Error types raised by the lab.

Messages follow a "<Component>: <reason>" convention so callers (and tests)
can match on the component that refused the input.
"""


class MinMetricError(Exception):
    pass


class InvalidBody(MinMetricError):
    pass


class DimensionMismatch(MinMetricError):
    pass


class NotInterior(MinMetricError):
    pass


class NotOnBoundary(MinMetricError):
    pass


class ZeroVector(MinMetricError):
    pass


class AmbiguousProjection(MinMetricError):
    pass


class PlaneError(MinMetricError):
    pass


class SpecParseError(MinMetricError):
    pass


class UnknownMetric(MinMetricError):
    pass


class InvalidPolyline(MinMetricError):
    pass


class SegmentExitsBody(MinMetricError):
    pass


class InconsistentReport(MinMetricError):
    pass


class DisconnectedMesh(MinMetricError):
    pass


class UnboundedBody(MinMetricError):
    pass


class TriangleInequalityViolation(MinMetricError):
    def __init__(self, message, value):
        super().__init__(message)
        self.value = value


class ApertureError(MinMetricError):
    pass


class EndpointMismatch(MinMetricError):
    pass


class ConfigError(MinMetricError):
    pass


class UnknownScenario(MinMetricError):
    pass
