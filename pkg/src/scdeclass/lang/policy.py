"""Security policies: a low/high partition plus an optional declassifier."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable

from .analysis import all_vars, input_vars, written_vars
from .ast import Program


class PolicyError(ValueError):
    """Raised by :func:`validate_policy`; ``errors`` lists every violation found."""

    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = errors


@dataclass(frozen=True)
class Policy:
    low: frozenset[str] = frozenset()
    high: frozenset[str] = frozenset()
    declassifier: Program | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "low", frozenset(self.low))
        object.__setattr__(self, "high", frozenset(self.high))

    @property
    def released(self) -> frozenset[str]:
        """W: the variables written by the declassifier (empty without one)."""
        if self.declassifier is None:
            return frozenset()
        return frozenset(written_vars(self.declassifier))

    def with_low(self, names: Iterable[str]) -> "Policy":
        names = frozenset(names)
        return replace(self, low=self.low | names, high=self.high - names)

    def with_high(self, names: Iterable[str]) -> "Policy":
        names = frozenset(names)
        return replace(self, high=self.high | names, low=self.low - names)

    def is_low(self, name: str) -> bool:
        return name in self.low


def make_policy(low: Iterable[str] = (), high: Iterable[str] = (), declassifier: Program | None = None) -> Policy:
    return Policy(frozenset(low), frozenset(high), declassifier)


def validate_policy(p: Program, pol: Policy) -> Policy:
    """Check ``pol`` against ``p`` and return it with W added to the low set.

    Raises :class:`PolicyError` listing every violation: overlapping
    partitions, undeclared input variables of ``p`` or of the declassifier,
    a declassifier writing a variable that occurs in ``p``, or W clashing
    with the high set.
    """
    errors: list[str] = []
    overlap = pol.low & pol.high
    if overlap:
        errors.append(f"variables both low and high: {', '.join(sorted(overlap))}")

    declared = pol.low | pol.high
    missing = input_vars(p) - declared
    if missing:
        errors.append(f"undeclared input variables: {', '.join(sorted(missing))}")

    low = pol.low
    if pol.declassifier is not None:
        w = pol.released
        clash = w & all_vars(p)
        if clash:
            errors.append(
                f"declassifier writes variables occurring in the program: {', '.join(sorted(clash))}"
            )
        missing_d = input_vars(pol.declassifier) - declared - w
        if missing_d:
            errors.append(f"undeclared declassifier inputs: {', '.join(sorted(missing_d))}")
        high_w = w & pol.high
        if high_w:
            errors.append(f"declassified outputs declared high: {', '.join(sorted(high_w))}")
        low = low | w

    if errors:
        raise PolicyError(errors)
    return replace(pol, low=low)
