"""Exception hierarchy shared by all saddlefields modules."""


class SaddleFieldsError(Exception):
    """Base class for all library errors."""


# --- polynomial / factorization layer ---

class ZeroFunction(SaddleFieldsError):
    """The polynomial is identically zero where a nonzero one is required."""


class LowOrder(SaddleFieldsError):
    """Vanishing order at the origin is below what the operation needs."""


class NotAPower(SaddleFieldsError):
    """A homogeneous polynomial is not a pure power of one linear form."""


class OrderTooLow(SaddleFieldsError):
    """A linear factor divides to order < 3, so it is not an umbilic segment."""


# --- chart / geometry layer ---

class HemisphereViolation(SaddleFieldsError):
    """Point is outside the open hemisphere x0 > 0 of the gnomonic chart."""


class DegenerateMatrix(SaddleFieldsError):
    """All coefficients of the principal-direction equation vanish."""


class UmbilicPoint(DegenerateMatrix):
    """The principal cross is undefined: the point is umbilic."""


class DegeneratePoint(DegenerateMatrix):
    """The homotopy matrix field degenerates at this point."""


class OriginQuery(SaddleFieldsError):
    """The extended cross field has a genuine singularity at the origin."""


# --- locus / direction layer ---

class UnclassifiedZeros(SaddleFieldsError):
    """Grid zeros of the Hessian are not explained by detected segments.

    Carries the offending report in ``self.report``.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NoDirectionFound(SaddleFieldsError):
    """No scanned direction was admissible; shrink the region and retry."""


# --- index certification layer ---

class NearZeroSample(SaddleFieldsError):
    """A contour sample fell on a (near-)zero of the field."""


class NoStabilization(SaddleFieldsError):
    """The index did not stabilize within the allowed radius halvings."""


class CertificationFailure(SaddleFieldsError):
    """Angular steps stayed >= pi/4 after the refinement budget was spent."""


# --- sphere construction layer ---

class CurvatureViolation(SaddleFieldsError):
    """The assembled annulus has a sample with positive Gauss curvature.

    ``self.worst_point`` and ``self.worst_value`` identify the sample.
    """

    def __init__(self, message, worst_point=None, worst_value=None):
        super().__init__(message)
        self.worst_point = worst_point
        self.worst_value = worst_value


# --- CLI / scenario layer ---

class ConfigError(SaddleFieldsError):
    """Malformed or inconsistent scenario configuration."""


class AnalysisError(SaddleFieldsError):
    """An analysis failed; the original module error is chained as cause."""
