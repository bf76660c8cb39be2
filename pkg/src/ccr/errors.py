"""Shared error types for loading, running, and checking."""

from __future__ import annotations


class CcrError(Exception):
    pass


class DuplicateNameError(CcrError):
    def __init__(self, name: str):
        super().__init__(f"function {name!r} is defined more than once")
        self.name = name


class NoMainError(CcrError):
    def __init__(self):
        super().__init__("no module defines a main function")


class ResolverExhausted(CcrError):
    def __init__(self, what: str):
        super().__init__(f"scripted resolver ran out of answers for {what}")
        self.what = what


class UnresolvableDomain(CcrError):
    def __init__(self, tag: str):
        super().__init__(f"no sampler registered for unbounded domain {tag!r}")
        self.tag = tag


class BoundMismatch(CcrError):
    def __init__(self, lhs: int, rhs: int):
        super().__init__(f"trace sets computed at different fuels: {lhs} vs {rhs}")


class PcmMismatch(CcrError):
    pass


class NoRuleApplicable(CcrError):
    """Structured-carrier update with no registered rule; distinct from False."""


class UndecidableExists(CcrError):
    pass


class DomainMismatch(CcrError):
    def __init__(self, missing, extra):
        super().__init__(
            f"pre-abstraction functions and output conditions differ: "
            f"missing specs {sorted(missing)}, extra specs {sorted(extra)}"
        )


class PreconditionUnsatisfied(CcrError):
    def __init__(self, detail: str):
        super().__init__(f"main's precondition rejects the initial resource: {detail}")


class GlobalInvalidity(CcrError):
    def __init__(self, detail: str):
        super().__init__(f"initial resources are inconsistent: {detail}")
