"""Error hierarchy shared by all glam modules.

Every error carries a stable machine-readable ``code`` plus a human
message; ``render()`` produces the one-line form used by the CLI,
with a source span when one is known.
"""


class GlamError(Exception):
    code = "Error"

    def __init__(self, message, loc=None):
        super().__init__(message)
        self.message = message
        self.loc = loc  # (line, col) or None

    def render(self):
        if self.loc is not None:
            line, col = self.loc
            return f"{self.code}: {self.message} (at {line}:{col})"
        return f"{self.code}: {self.message}"


class ParseError(GlamError):
    code = "ParseError"


class TypingError(GlamError):
    code = "TypingError"


class UnboundTypeVar(TypingError):
    code = "UnboundTypeVar"


class UnguardedMu(TypingError):
    code = "UnguardedMu"


class OpenBox(TypingError):
    code = "OpenBox"


class TypeMismatch(TypingError):
    code = "TypeMismatch"


class NonConstantSubstType(TypingError):
    code = "NonConstantSubstType"


class EscapingVariable(TypingError):
    code = "EscapingVariable"


class CannotSynthesize(TypingError):
    code = "CannotSynthesize"


class UnboundVariable(TypingError):
    code = "UnboundVariable"


class MachineError(GlamError):
    code = "MachineError"


class FuelExhaustedError(MachineError):
    code = "FuelExhausted"


class StuckError(MachineError):
    code = "Stuck"


class DenotError(GlamError):
    code = "DenotError"


class IndexZero(DenotError):
    code = "IndexZero"


class DepthExceeded(DenotError):
    code = "DepthExceeded"


class BdeError(GlamError):
    code = "BdeError"


class UnknownSymbol(BdeError):
    code = "UnknownSymbol"


class BadVariable(BdeError):
    code = "BadVariable"


class ForwardReference(BdeError):
    code = "ForwardReference"
