"""Exception hierarchy.

Every error carries an ``exit_code`` used by the command line front end:
1 for usage errors, 2 for data errors, 3 for runtime failures.
"""


class KgtkError(Exception):
    exit_code = 2


class UsageError(KgtkError):
    exit_code = 1


class RuntimeFailure(KgtkError):
    exit_code = 3


# -- values -----------------------------------------------------------------

class MalformedValue(KgtkError):
    def __init__(self, kind, position, message):
        self.kind = kind
        self.position = position
        self.message = message
        super().__init__(f"malformed {kind} at offset {position}: {message}")


# -- file structure ---------------------------------------------------------

class HeaderError(KgtkError):
    pass


class MissingRequiredColumn(HeaderError):
    pass


class DuplicateColumn(HeaderError):
    pass


class AmbiguousAlias(HeaderError):
    pass


class EmptyInput(KgtkError):
    pass


class IoFailure(RuntimeFailure):
    pass


class RaggedRow(KgtkError):
    pass


# -- validation -------------------------------------------------------------

class AbortOnFirstError(KgtkError):
    def __init__(self, finding):
        self.finding = finding
        super().__init__(f"validation failed: {finding}")


# -- transforms -------------------------------------------------------------

class PatternSyntax(UsageError):
    pass


class UnknownColumn(KgtkError):
    pass


class ProtectedColumn(KgtkError):
    pass


class TempSpaceExhausted(RuntimeFailure):
    pass


class UnsortedInput(KgtkError):
    pass


class KeyArityMismatch(UsageError):
    pass


class JoinGroupTooLarge(KgtkError):
    pass


# -- analytics --------------------------------------------------------------

class NonConvergenceWarning(UserWarning):
    pass


class GraphTooLarge(RuntimeFailure):
    pass


# -- embeddings -------------------------------------------------------------

class UnknownEncoder(UsageError):
    pass


class EncoderFailure(KgtkError):
    pass


# -- interchange ------------------------------------------------------------

class MalformedTriple(KgtkError):
    def __init__(self, line_number, message):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")


class MalformedRow(KgtkError):
    pass


class UnexpandablePrefix(KgtkError):
    pass


class NonSymbolSubject(KgtkError):
    pass


# -- pipelines --------------------------------------------------------------

class UnknownSubcommand(UsageError):
    pass


class BadStageArgs(UsageError):
    def __init__(self, index, message):
        self.index = index
        super().__init__(f"stage {index + 1}: {message}")


class EmptyStage(UsageError):
    pass


class StageFailure(KgtkError):
    def __init__(self, index, name, cause):
        self.index = index
        self.name = name
        self.cause = cause
        super().__init__(f"stage {index + 1} ({name}) failed: {cause}")

    @property
    def exit_code(self):
        return getattr(self.cause, "exit_code", 3)
