"""Exception hierarchy shared by all modules."""


class KinematicsError(Exception):
    """Base class for every error raised by kneepkm."""


class InvalidGeometry(KinematicsError, ValueError):
    """A geometry record violated one or more invariants.

    ``problems`` holds one human-readable entry per violated invariant.
    """

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid geometry: " + "; ".join(self.problems))


class InvalidParams(KinematicsError, ValueError):
    pass


class Unreachable(KinematicsError):
    """The pose cannot be assembled (negative discriminant, degenerate limb)."""


class NoConvergence(KinematicsError):
    pass


class SingularJacobian(KinematicsError):
    pass


class GridTooLarge(KinematicsError, ValueError):
    pass
