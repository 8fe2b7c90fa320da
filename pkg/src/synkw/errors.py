"""Exception hierarchy shared across the package.

CLI maps SynkwError subclasses to exit code 2 (bad input) and
InvariantViolation to exit code 3.
"""


class SynkwError(Exception):
    pass


class InvariantViolation(SynkwError):
    pass


# text / lexicon loading
class ReservedSeparator(SynkwError):
    """Input token contains a reserved key separator ('|' or '‖')."""


# trie
class EmptySequence(SynkwError):
    pass


class UnknownNode(SynkwError):
    pass


class SnapshotFormatError(SynkwError):
    pass


# translation
class EmptyCorpus(SynkwError):
    pass


# discriminant
class MissingStats(SynkwError):
    pass


class SingleClassCorpus(SynkwError):
    pass


class ParseError(SynkwError):
    def __init__(self, path, line_no, message):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = path
        self.line_no = line_no


class ScoreOutOfRange(SynkwError):
    pass


class MissingScore(SynkwError):
    pass


# eval
class EmptyReference(SynkwError):
    pass


class EmptyCandidate(SynkwError):
    pass


class SingleClass(SynkwError):
    pass


class ZeroSearches(SynkwError):
    pass


class SampleTooLarge(SynkwError):
    pass
