"""Exception types shared across the package."""


class SepNetError(Exception):
    """Base class for all errors raised by this package."""


class NetSyntaxError(SepNetError, ValueError):
    """Malformed net document; carries the 1-based line and column."""

    def __init__(self, message, line=0, column=0):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}" if line else message)


class OutcomeError(SepNetError, ValueError):
    """An outcome does not fit the net it is interpreted against."""


class CapExceeded(SepNetError):
    """An enumeration or search would visit more outcomes than allowed."""

    def __init__(self, size, cap):
        self.size = size
        self.cap = cap
        super().__init__(f"{size} outcomes exceeds the cap of {cap}")


class CyclicNetError(SepNetError):
    """The dependency graph has a cycle where an acyclic net is required."""


class AmbiguousTop(SepNetError):
    """No unique most-preferred value exists for a variable in some context.

    ``candidates`` holds the tied top values (the whole domain when the
    statement for the context is missing).
    """

    def __init__(self, variable, context, candidates):
        self.variable = variable
        self.context = dict(context)
        self.candidates = tuple(candidates)
        ctx = ", ".join(f"{k}={v}" for k, v in self.context.items()) or "<empty>"
        super().__init__(
            f"no unique top for {variable} given {ctx}: tied {list(self.candidates)}"
        )


class MissingEfEntry(SepNetError, KeyError):
    """An evaluation function has no value for the requested parent context."""

    def __init__(self, variable, context):
        self.variable = variable
        self.context = dict(context)
        ctx = ", ".join(f"{k}={v}" for k, v in self.context.items()) or "<empty>"
        super().__init__(f"no evaluation value for {variable} given {ctx}")

    def __str__(self):
        return self.args[0]


class SurveyFormatError(SepNetError, ValueError):
    """Survey CSV has the wrong header or out-of-range rows."""

    def __init__(self, message, rows=()):
        self.rows = tuple(rows)
        super().__init__(message)
