"""Exception hierarchy.

The CLI maps each family to an exit code: data problems exit with 2,
numeric failures with 3.
"""


class APFError(Exception):
    """Base class for all library errors."""

    exit_code = 2


class GeometryError(APFError):
    pass


class DuplicatePoints(GeometryError):
    def __init__(self, i: int, j: int):
        super().__init__(f"points {i} and {j} coincide")
        self.indices = (i, j)


class AllCollinear(GeometryError):
    def __init__(self):
        super().__init__("all points are collinear; no triangle exists")


class GridMismatch(APFError):
    def __init__(self, msg="curves are not evaluated on a common grid"):
        super().__init__(msg)


class LengthMismatch(APFError):
    pass


class BadRank(APFError):
    pass


class BadK(APFError):
    pass


class WindowOutOfRange(APFError):
    pass


class ParseError(APFError):
    def __init__(self, line: int, msg: str = "cannot parse line"):
        super().__init__(f"line {line}: {msg}")
        self.line = line


class UnknownVertexInEdge(ParseError):
    def __init__(self, line: int, vertex):
        super().__init__(line, f"edge references unknown vertex {vertex!r}")
        self.vertex = vertex


class NumericFailure(APFError):
    exit_code = 3
