"""Exception hierarchy shared across the package."""


class IsseError(Exception):
    """Base class for all errors raised by this package."""


class InvalidLayerSpec(IsseError):
    pass


class EmptySolutionSpace(IsseError):
    """No complete solution survived the exploration.

    ``layer`` and ``level`` locate where the last candidate was removed;
    ``level`` is ``None`` when the generator itself produced nothing.
    """

    def __init__(self, layer: int, level: int | None):
        self.layer = layer
        self.level = level
        where = "generator" if level is None else f"filter level {level}"
        super().__init__(f"no solution survived: last candidate died at layer {layer} ({where})")


class SpaceTooLarge(IsseError):
    def __init__(self, count: int, cap: int, exact: bool = True):
        self.count = count
        self.cap = cap
        self.exact = exact
        bound = "" if exact else "at least "
        super().__init__(f"brute-force space has {bound}{count} combinations, cap is {cap}")


class NoFeasibleIndividual(IsseError):
    pass


class InvalidWeights(IsseError):
    pass


class NoFeasibleConfiguration(IsseError):
    def __init__(self, step: int, kind: str):
        self.step = step
        self.kind = kind
        super().__init__(f"step {step} ({kind!r}) is offered by no admissible module")


class GridTooSmall(IsseError):
    def __init__(self, modules: int, cells: int):
        self.modules = modules
        self.cells = cells
        super().__init__(f"{modules} modules do not fit on {cells} grid cells")


class UnplacedModule(IsseError):
    def __init__(self, module: str):
        self.module = module
        super().__init__(f"module {module!r} has no cell in the layout")


class MissingCurrentLayout(IsseError):
    pass


class InconsistentSolution(IsseError):
    pass


class ParseError(IsseError):
    """Malformed scenario document; ``where`` is a line number or a field path."""

    def __init__(self, where: str, message: str):
        self.where = where
        super().__init__(f"{where}: {message}")


class ValidationError(IsseError):
    """A scenario parsed but violates a named invariant."""

    def __init__(self, invariant: str, detail: str = ""):
        self.invariant = invariant
        super().__init__(invariant if not detail else f"{invariant}: {detail}")
