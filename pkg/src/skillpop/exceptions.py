"""Exception hierarchy for skillpop."""


class SkillPopError(Exception):
    """Base class for all package errors."""


class DuplicateSkill(SkillPopError, ValueError):
    pass


class EmptyDictionary(SkillPopError, ValueError):
    pass


class MalformedRecord(SkillPopError, ValueError):
    pass


class UnknownSkill(SkillPopError, KeyError):
    pass


class UnknownLabel(SkillPopError, KeyError):
    pass


class TopicOutOfRange(SkillPopError, IndexError):
    pass


class EmptyCorpus(SkillPopError, ValueError):
    pass


class EmptyTestSet(SkillPopError, ValueError):
    pass


class InconsistentCounts(SkillPopError, AssertionError):
    pass


class VersionMismatch(SkillPopError, ValueError):
    pass


class CorruptModel(SkillPopError, ValueError):
    pass


class LabelUnseen(SkillPopError, KeyError):
    pass


class IncompleteJudgments(SkillPopError, ValueError):
    pass


class LengthMismatch(SkillPopError, ValueError):
    pass


class DegenerateInput(SkillPopError, ValueError):
    pass


class InvalidDims(SkillPopError, ValueError):
    pass


class DimMismatch(SkillPopError, ValueError):
    pass
