"""Exception hierarchy.

Everything raised on purpose derives from :class:`ProstarError`.  Problems
with the mathematical input derive from :class:`ConstructionError`; problems
with scene files derive from :class:`SceneError`.
"""

from __future__ import annotations


class ProstarError(Exception):
    pass


class ConstructionError(ProstarError):
    """A construction or verification step failed on valid-looking input."""

    def details(self) -> dict:
        return {}


class SceneError(ProstarError):
    pass


class ParseError(SceneError):
    pass


class UnresolvedReference(SceneError):
    pass


# poset
class EmptyPoset(ConstructionError):
    pass


class NotDirected(ConstructionError):
    def __init__(self, a, b):
        super().__init__(f"elements {a!r} and {b!r} have no upper bound")
        self.pair = (a, b)

    def details(self):
        return {"pair": [str(self.pair[0]), str(self.pair[1])]}


class NotAntisymmetric(ConstructionError):
    def __init__(self, a, b):
        super().__init__(f"cycle between {a!r} and {b!r}")
        self.pair = (a, b)

    def details(self):
        return {"pair": [str(self.pair[0]), str(self.pair[1])]}


class UnknownElement(ConstructionError):
    pass


# spaces
class NotIsometric(ConstructionError):
    pass


class NotNested(ConstructionError):
    pass


class DimensionMismatch(ConstructionError):
    pass


# operators
class ShapeMismatch(ConstructionError):
    pass


class PosetMismatch(ConstructionError):
    pass


class NotEndomorphism(ConstructionError):
    pass


class _LevelPairError(ConstructionError):
    what = ""

    def __init__(self, lam, mu, residual):
        super().__init__(f"{self.what} fails for {lam!r} <= {mu!r}: residual {residual:.3e}")
        self.lam, self.mu, self.residual = lam, mu, residual

    def details(self):
        return {"lambda": str(self.lam), "mu": str(self.mu), "residual": self.residual}


class CoherenceViolation(_LevelPairError):
    what = "coherence T_mu J = J T_lambda"


class AdjointCoherenceViolation(_LevelPairError):
    what = "adjoint coherence T_mu* J = J T_lambda*"


# algebras
class ClosureTooLarge(ConstructionError):
    pass


class NotInAlgebra(ConstructionError):
    pass


class InvalidSystem(ConstructionError):
    pass


class _LevelError(ConstructionError):
    what = ""

    def __init__(self, lam, residual):
        super().__init__(f"{self.what} at level {lam!r}: residual {residual:.3e}")
        self.lam, self.residual = lam, residual

    def details(self):
        return {"lambda": str(self.lam), "residual": self.residual}


class NotMultiplicative(_LevelError):
    what = "not multiplicative"


class NotStarPreserving(_LevelError):
    what = "not *-preserving"


class NotCoherent(_LevelError):
    what = "coherence square fails"


# kernels and semigroups
class KernelNotPSD(ConstructionError):
    def __init__(self, lam, min_eigenvalue):
        super().__init__(f"kernel Gram matrix at level {lam!r} has eigenvalue {min_eigenvalue:.3e}")
        self.lam, self.min_eigenvalue = lam, min_eigenvalue

    def details(self):
        return {"lambda": str(self.lam), "min_eigenvalue": self.min_eigenvalue}


class InvalidSemigroup(ConstructionError):
    pass


class InvalidAction(ConstructionError):
    pass


class SemigroupTooLarge(ConstructionError):
    pass


class PointsNotSpanning(ConstructionError):
    pass


class ProductOutsideSpan(ConstructionError):
    pass


# dilations
class NotInvariant(ConstructionError):
    def __init__(self, s, x, y, residual):
        super().__init__(f"k(s.x, y) != k(x, s*.y) for s={s!r}, x={x!r}, y={y!r}: residual {residual:.3e}")
        self.s, self.x, self.y, self.residual = s, x, y, residual

    def details(self):
        return {"s": str(self.s), "x": str(self.x), "y": str(self.y), "residual": self.residual}


class BoundednessFails(ConstructionError):
    def __init__(self, s, lam, witness):
        super().__init__(f"boundedness condition fails for s={s!r} at level {lam!r}")
        self.s, self.lam, self.witness = s, lam, witness

    def details(self):
        return {"s": str(self.s), "lambda": str(self.lam), "witness": self.witness}


class NotMinimal(ConstructionError):
    pass


class NotEquivalent(ConstructionError):
    pass


class NotUnital(ConstructionError):
    pass


class NotCompletelyPositive(ConstructionError):
    pass


# modules
class GramianNotHermitian(ConstructionError):
    pass


class GramianNotPositive(ConstructionError):
    pass


class ActionIncompatible(ConstructionError):
    pass


class NotAModule(ConstructionError):
    pass
