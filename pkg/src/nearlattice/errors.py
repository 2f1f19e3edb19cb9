"""Exception types shared across the package."""


class NearLatticeError(Exception):
    """Base class for all package errors."""


class NonEmbeddableError(NearLatticeError):
    """Edge lengths cannot be realized by a tetrahedron in R^3."""


class DegenerateReferenceError(NearLatticeError):
    """Reference simplex is (numerically) degenerate."""


class DegenerateFaceError(NearLatticeError):
    """A triangular face is collinear within tolerance."""


class ScaleOutOfRangeError(NearLatticeError):
    """Edge scale l outside the open interval (1, 1+alpha)."""


class RadiusTooLargeError(NearLatticeError):
    """Ball-sampler radius violates 2r < min(l-1, 1+alpha-l) or r >= 1/2."""


class TrialsExhaustedError(NearLatticeError):
    """Rejection sampler hit max_trials without an accepted draw."""

    def __init__(self, trials):
        super().__init__(f"no admissible draw in {trials} trials (partition function ~ 0)")
        self.trials = trials


class InadmissibleStartError(NearLatticeError):
    """Metropolis chain started from a configuration failing (Omega1)-(Omega4)."""


class NotEnumerableError(NearLatticeError):
    """Point set admits no triangular-lattice labeling; carries a witness."""

    def __init__(self, reason, witness=None):
        super().__init__(reason)
        self.witness = witness


class NeighborCountError(NearLatticeError):
    """A point does not have exactly six annulus neighbors."""

    def __init__(self, point_index, count):
        super().__init__(f"point {point_index} has {count} annulus neighbors, expected 6")
        self.point_index = point_index
        self.count = count


class SnapshotParseError(NearLatticeError):
    """Malformed snapshot file; carries the offending line number."""

    def __init__(self, line_number, message):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class SnapshotVersionError(NearLatticeError):
    """Snapshot format version not supported."""


class SpecValidationError(NearLatticeError):
    """Experiment spec failed validation before any sampling."""
