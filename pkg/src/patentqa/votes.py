"""Majority voting over repeated detector passes, with severity-escalating ties.

A strict majority label wins. Without one, the most severe label present wins;
flagging too much is preferred over flagging too little.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Callable, Sequence, TypeVar

from patentqa.errors import ConfigurationError, DomainError

V = TypeVar("V")
L = TypeVar("L")


@dataclass(frozen=True)
class VoteAggregation:
    """k repeated passes merged by majority-with-escalation."""

    k: int = 1

    def __post_init__(self):
        if self.k < 1 or self.k % 2 == 0:
            raise ConfigurationError(f"vote count k must be a positive odd integer, got {self.k}")


def aggregate_labels(labels: Sequence[L], severity_order: Sequence[L]) -> L:
    """Return the winning label; ``severity_order`` lists labels least→most severe."""
    if not labels:
        raise DomainError("cannot aggregate an empty vote list")
    rank = {label: i for i, label in enumerate(severity_order)}
    for label in labels:
        if label not in rank:
            raise DomainError(f"label {label!r} is not in the severity order")
    counts = Counter(labels)
    top_label, top_count = counts.most_common(1)[0]
    if top_count * 2 > len(labels):
        return top_label
    return max(counts, key=lambda lbl: rank[lbl])


def aggregate_votes(
    verdicts: Sequence[V],
    policy: VoteAggregation,
    label_of: Callable[[V], L],
    severity_order: Sequence[L],
) -> V:
    """Pick the verdict carrying the winning label (first such verdict in vote order)."""
    if not verdicts:
        raise DomainError("cannot aggregate an empty vote list")
    if len(verdicts) != policy.k:
        raise DomainError(f"expected {policy.k} votes, got {len(verdicts)}")
    winner = aggregate_labels([label_of(v) for v in verdicts], severity_order)
    for verdict in verdicts:
        if label_of(verdict) == winner:
            return verdict
    raise AssertionError("winning label must come from the vote list")
