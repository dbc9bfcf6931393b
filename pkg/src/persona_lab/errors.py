"""Exception hierarchy shared across the package."""


class PersonaLabError(Exception):
    """Base class for every error raised by persona_lab."""


class ConfigError(PersonaLabError):
    pass


# backend
class BackendError(PersonaLabError):
    pass


class BackendUnavailable(BackendError):
    """Network, auth or rate-limit failure that survived all retries."""


class RateLimited(BackendError):
    """Provider answered 429. Retried internally, never escapes ``generate``."""


class ScriptMiss(BackendError):
    """A mock or replay backend has no entry for the request."""


class StoreCorrupt(BackendError):
    pass


# data quality
class DataQualityError(PersonaLabError):
    pass


class IncompleteSheet(DataQualityError):
    def __init__(self, missing):
        self.missing = frozenset(missing)
        super().__init__(f"answer sheet is missing {len(self.missing)} item(s): {sorted(self.missing)}")


class OutOfRangeAnswer(DataQualityError):
    pass


class DuplicateLetter(DataQualityError):
    pass


class PersistentlyMalformed(DataQualityError):
    def __init__(self, message, raw_texts=()):
        self.raw_texts = list(raw_texts)
        super().__init__(message)


class GroupFailure(DataQualityError):
    """More than half of a persona group failed during a run."""


# liwc
class LiwcError(PersonaLabError):
    pass


class MalformedHeader(LiwcError):
    pass


class UnknownCategoryRef(LiwcError):
    def __init__(self, category_id, line_no):
        self.category_id = category_id
        self.line_no = line_no
        super().__init__(f"line {line_no}: entry references undeclared category {category_id}")


class BadEntryLine(LiwcError):
    def __init__(self, line_no, line):
        self.line_no = line_no
        super().__init__(f"line {line_no}: cannot parse entry {line!r}")


class EmptyDocument(LiwcError):
    pass


# statistics / ml
class StatsError(PersonaLabError, ValueError):
    pass


class DegenerateData(StatsError):
    pass


class InsufficientSamples(StatsError):
    pass


class SingleClass(StatsError):
    pass


class ConstantSequence(StatsError):
    pass


class LengthMismatch(StatsError):
    pass


class TooFewSamples(StatsError):
    pass


class NonFinite(StatsError):
    pass


# run artifacts
class RunError(PersonaLabError):
    pass


class SchemaMismatch(RunError):
    pass


class CorruptRun(RunError):
    pass


class MissingPhase(RunError):
    pass


class PhaseMismatch(RunError):
    pass


class AlreadyExists(PersonaLabError):
    pass
