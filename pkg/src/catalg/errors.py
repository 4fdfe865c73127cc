"""Exception types raised by the validation and computation routines."""


class CatalgError(Exception):
    """Base class for all structured errors."""


class NonAssociative(CatalgError):
    def __init__(self, h, g, f):
        self.triple = (h, g, f)
        super().__init__(f"composition not associative at ({h}, {g}, {f})")


class MissingIdentity(CatalgError):
    def __init__(self, obj, morphism=None):
        self.obj = obj
        self.morphism = morphism
        where = f" for {morphism}" if morphism is not None else ""
        super().__init__(f"identity law fails at object {obj}{where}")


class IllTypedComposite(CatalgError):
    def __init__(self, g, f, detail=""):
        self.pair = (g, f)
        super().__init__(f"ill-typed composite ({g}, {f}) {detail}".rstrip())


class NotFunctorial(CatalgError):
    pass


class NotClosed(CatalgError):
    def __init__(self, which, g, f):
        self.which = which
        self.pair = (g, f)
        super().__init__(f"{which} class not closed under composition at ({g}, {f})")


class NotAdequate(CatalgError):
    def __init__(self, forward, backward):
        self.cospan = (forward, backward)
        super().__init__(
            f"no pullback with classed legs for cospan (forwards {forward}, backwards {backward})"
        )


class IndexOutOfRange(CatalgError):
    pass


class NotSimplicial(CatalgError):
    def __init__(self, identity, detail=""):
        self.identity = identity
        super().__init__(f"simplicial identity {identity} fails {detail}".rstrip())


class PreconditionFailed(CatalgError):
    pass


class BackendUnsupported(CatalgError):
    pass


class SearchBudgetExceeded(CatalgError):
    def __init__(self, budget, needed):
        self.budget = budget
        self.needed = needed
        super().__init__(f"search space {needed} exceeds budget {budget}")


class TruncationExceeded(CatalgError):
    pass


class SegalFailure(CatalgError):
    def __init__(self, level, detail=""):
        self.level = level
        super().__init__(f"Segal comparison fails at level {level} {detail}".rstrip())


class AssocFailure(CatalgError):
    def __init__(self, at, detail=""):
        self.at = at
        super().__init__(f"associativity fails at {at} {detail}".rstrip())


class UnitFailure(CatalgError):
    def __init__(self, at, detail=""):
        self.at = at
        super().__init__(f"unit law fails at {at} {detail}".rstrip())


class Divergent(CatalgError):
    """Free-monoid iteration still produced new elements at the size bound.

    Carries the partial result so callers may inspect the truncation.
    """

    def __init__(self, partial, bound):
        self.partial = partial
        self.bound = bound
        super().__init__(f"free monoid does not stabilize within bound {bound}")


class BadEquivariance(CatalgError):
    pass


class AxiomFailure(CatalgError):
    def __init__(self, axiom, at):
        self.axiom = axiom
        self.at = at
        super().__init__(f"{axiom} fails at {at}")


class ParseError(CatalgError):
    def __init__(self, path, detail):
        self.path = path
        super().__init__(f"{path}: {detail}")
