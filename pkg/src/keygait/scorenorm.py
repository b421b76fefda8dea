"""Per-subject score normalization.

Raw detector scores live on wildly different scales across subjects
(sequence length alone shifts them), so a single global threshold over
raw scores is meaningless. Normalization maps each subject's batch of
query scores into [0, 1]: either min/max, or mean plus/minus ``h_s``
standard deviations with clamping, which resists outliers. Both are
monotone within a subject, so per-subject error rates are untouched;
only the pooled global picture changes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterator, Sequence

from .config import ScoreNormConfig
from .errors import ScoreNormError
from .events import Label


@dataclass(frozen=True)
class ScoreRecord:
    """One scored query. ``flagged`` marks failure-to-capture: the sample
    could not be processed and carries the sentinel minimal score."""

    subject_id: str
    sample_id: str
    raw_score: float
    normalized_score: float | None = None
    label: Label | None = None
    flagged: bool = False


@dataclass(frozen=True)
class ScoreSet:
    """All scored queries of a run, ordered by (subject_id, sample_id)."""

    records: tuple[ScoreRecord, ...]

    def __post_init__(self) -> None:
        ordered = tuple(
            sorted(self.records, key=lambda r: (r.subject_id, r.sample_id))
        )
        object.__setattr__(self, "records", ordered)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[ScoreRecord]:
        return iter(self.records)

    def by_subject(self) -> dict[str, list[ScoreRecord]]:
        out: dict[str, list[ScoreRecord]] = {}
        for r in self.records:
            out.setdefault(r.subject_id, []).append(r)
        return out

    @property
    def ftc_count(self) -> int:
        return sum(1 for r in self.records if r.flagged)


def normalize_minmax(scores: Sequence[float]) -> list[float]:
    """Map scores to [0, 1] by the observed min/max. A degenerate batch
    (all scores equal) maps to 0.5 everywhere."""
    if not scores:
        return []
    lo = min(scores)
    hi = max(scores)
    if lo == hi:
        return [0.5] * len(scores)
    return [(s - lo) / (hi - lo) for s in scores]


def normalize_sd(scores: Sequence[float], h_s: float = 2.0) -> list[float]:
    """Map scores to [0, 1] against mean +/- h_s population standard
    deviations, clamping anything outside the bounds.

    Raises:
        ScoreNormError: fewer than 2 scores, or h_s <= 0.
    """
    if h_s <= 0:
        raise ScoreNormError(f"h_s must be positive, got {h_s}")
    if len(scores) < 2:
        raise ScoreNormError(
            f"sd normalization needs at least 2 scores, got {len(scores)}"
        )
    mean = sum(scores) / len(scores)
    sd = math.sqrt(sum((s - mean) ** 2 for s in scores) / len(scores))
    if sd == 0.0:
        return [0.5] * len(scores)
    lo = mean - h_s * sd
    width = 2.0 * h_s * sd
    return [min(1.0, max(0.0, (s - lo) / width)) for s in scores]


def apply_normalization(scores: ScoreSet, config: ScoreNormConfig) -> ScoreSet:
    """Normalize each subject's scores independently.

    Flagged (failure-to-capture) records are excluded from the statistics
    and pinned to normalized 0.0 so they stay rejected at any operating
    point; with method "none" raw scores pass through untouched.
    """
    out: list[ScoreRecord] = []
    for subject_id, records in sorted(scores.by_subject().items()):
        if config.kind == "none":
            out.extend(replace(r, normalized_score=r.raw_score) for r in records)
            continue
        live = [r for r in records if not r.flagged]
        if not live:
            # whole subject failed to capture; nothing to fit stats on
            out.extend(replace(r, normalized_score=0.0) for r in records)
            continue
        values = [r.raw_score for r in live]
        try:
            if config.kind == "minmax":
                normalized = normalize_minmax(values)
            else:
                normalized = normalize_sd(values, h_s=config.h_s)
        except ScoreNormError as exc:
            raise ScoreNormError(f"subject {subject_id}: {exc}") from exc
        mapped = {id(r): v for r, v in zip(live, normalized)}
        for r in records:
            out.append(
                replace(
                    r,
                    normalized_score=mapped[id(r)] if not r.flagged else 0.0,
                )
            )
    return ScoreSet(tuple(out))
