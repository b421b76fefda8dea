"""Alignment of approximately matching keystroke sequences.

Two typed renditions of the same string rarely produce identical key
sequences: modifiers get dropped, pressed in a different order, or
replaced (Caps Lock for Shift). Fixed-length feature extraction needs
every sample mapped onto a common target, so this module aligns a given
sequence to a target sequence key-by-key, keeping original timestamps.
It also provides the two baselines (truncate, discard modifiers), the
Damerau-Levenshtein distance used to quantify sequence mismatch, and a
dataset-level mismatch audit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from typing import Sequence

from .errors import AlignmentError
from .events import KeystrokeSequence, SubjectDataset
from .scancodes import MODIFIER_KEYS, SHIFT_KEYS


class EntryKind(Enum):
    MATCHED = "matched"
    SUBSTITUTED = "substituted"


@dataclass(frozen=True)
class MappingEntry:
    """How one target position was filled from the given sequence."""

    kind: EntryKind
    given_index: int


@dataclass(frozen=True)
class AlignmentMapping:
    """Full record of an alignment: one entry per target position, the
    given indices that were never used, and whether the degenerate
    reuse-last fallback fired (``flagged``)."""

    target_len: int
    entries: tuple[MappingEntry, ...]
    ignored: tuple[int, ...]
    flagged: bool = False

    def substitution_count(self) -> int:
        return sum(1 for e in self.entries if e.kind is EntryKind.SUBSTITUTED)


def _comparison_key(name: str, merge_shift_keys: bool) -> str:
    if merge_shift_keys and name in SHIFT_KEYS:
        return "shift"
    return name


def align(
    given: KeystrokeSequence,
    target: KeystrokeSequence,
    *,
    merge_shift_keys: bool = False,
) -> tuple[KeystrokeSequence, AlignmentMapping]:
    """Align ``given`` onto ``target``, producing a sequence of exactly
    ``len(target)`` keystrokes in target order with unmodified timestamps.

    Matching runs first: target positions are visited left to right and
    each takes the unconsumed given keystroke with the same key name that
    minimizes ``|given_index - position|`` (ties to the smaller index).
    Positions whose key has no unconsumed occurrence are then filled left
    to right by substitution: the unconsumed given keystroke at the same
    index, else the nearest unconsumed one (ties to the smaller index),
    else the last given keystroke is reused and the result is flagged.
    Leftover given keystrokes are recorded as ignored.

    Matching before substituting keeps the mapping injective whenever the
    given sequence is long enough, and guarantees that a key occurring
    exactly once in both sequences maps to itself. Because timestamps are
    never edited, a transposed pair yields a negative press-press latency
    downstream, which is signal, not an error.

    Raises:
        AlignmentError: either sequence is empty.
    """
    if len(target) == 0:
        raise AlignmentError("target sequence is empty")
    if len(given) == 0:
        raise AlignmentError("given sequence is empty")

    given_keys = [_comparison_key(k.key, merge_shift_keys) for k in given]
    target_keys = [_comparison_key(k.key, merge_shift_keys) for k in target]

    n_target = len(target_keys)
    consumed = [False] * len(given_keys)
    chosen: list[MappingEntry | None] = [None] * n_target

    # Pass 1: same-key matches.
    for i, key in enumerate(target_keys):
        best = -1
        best_dist = math.inf
        for j, gkey in enumerate(given_keys):
            if consumed[j] or gkey != key:
                continue
            dist = abs(j - i)
            if dist < best_dist:
                best_dist = dist
                best = j
        if best >= 0:
            consumed[best] = True
            chosen[i] = MappingEntry(EntryKind.MATCHED, best)

    # Pass 2: substitutions for the rest.
    flagged = False
    for i in range(n_target):
        if chosen[i] is not None:
            continue
        if i < len(given_keys) and not consumed[i]:
            pick = i
        else:
            pick = -1
            best_dist = math.inf
            for j in range(len(given_keys)):
                if consumed[j]:
                    continue
                dist = abs(j - i)
                if dist < best_dist:
                    best_dist = dist
                    pick = j
        if pick >= 0:
            consumed[pick] = True
        else:
            pick = len(given_keys) - 1
            flagged = True
        chosen[i] = MappingEntry(EntryKind.SUBSTITUTED, pick)

    entries = tuple(e for e in chosen if e is not None)
    assert len(entries) == n_target
    ignored = tuple(j for j, used in enumerate(consumed) if not used)
    mapping = AlignmentMapping(n_target, entries, ignored, flagged)
    aligned = KeystrokeSequence(
        tuple(given[e.given_index] for e in entries), aligned=True
    )
    return aligned, mapping


def truncate_align(
    given: KeystrokeSequence, target: KeystrokeSequence
) -> KeystrokeSequence:
    """Baseline: keep the first ``len(target)`` keystrokes of ``given``,
    repeating the last keystroke if it is too short."""
    if len(target) == 0:
        raise AlignmentError("target sequence is empty")
    if len(given) == 0:
        raise AlignmentError("given sequence is empty")
    n = len(target)
    kept = list(given.keystrokes[:n])
    while len(kept) < n:
        kept.append(kept[-1])
    return KeystrokeSequence(tuple(kept), aligned=True)


def discard_modifiers(seq: KeystrokeSequence) -> KeystrokeSequence:
    """Baseline: drop Shift (left and right) and Caps Lock keystrokes."""
    kept = tuple(k for k in seq.keystrokes if k.key not in MODIFIER_KEYS)
    return KeystrokeSequence(kept, aligned=seq.aligned)


def select_target(sequences: Sequence[KeystrokeSequence]) -> int:
    """Index of the shortest sequence; ties go to the first occurrence."""
    if not sequences:
        raise AlignmentError("no sequences to select a target from")
    return min(range(len(sequences)), key=lambda i: (len(sequences[i]), i))


@dataclass(frozen=True)
class AlignedSubject:
    """Per-subject alignment output. The target template is passed through
    unmodified; its mapping slot holds the trivial identity produced by
    aligning it to itself."""

    target_index: int
    templates: tuple[KeystrokeSequence, ...]
    template_mappings: tuple[AlignmentMapping, ...]
    queries: tuple[KeystrokeSequence, ...]
    query_mappings: tuple[AlignmentMapping, ...]


def align_subject(
    templates: Sequence[KeystrokeSequence],
    queries: Sequence[KeystrokeSequence],
    *,
    merge_shift_keys: bool = False,
) -> AlignedSubject:
    """Align every template and query of one subject to the subject's
    target template (the shortest one, first on ties)."""
    if not templates:
        raise AlignmentError("subject has no templates")
    target_index = select_target(templates)
    target = templates[target_index]
    aligned_templates: list[KeystrokeSequence] = []
    template_mappings: list[AlignmentMapping] = []
    for i, seq in enumerate(templates):
        if i == target_index:
            aligned_templates.append(
                KeystrokeSequence(target.keystrokes, aligned=True)
            )
            template_mappings.append(
                AlignmentMapping(
                    len(target),
                    tuple(
                        MappingEntry(EntryKind.MATCHED, j) for j in range(len(target))
                    ),
                    (),
                )
            )
            continue
        aligned, mapping = align(seq, target, merge_shift_keys=merge_shift_keys)
        aligned_templates.append(aligned)
        template_mappings.append(mapping)
    aligned_queries: list[KeystrokeSequence] = []
    query_mappings: list[AlignmentMapping] = []
    for seq in queries:
        aligned, mapping = align(seq, target, merge_shift_keys=merge_shift_keys)
        aligned_queries.append(aligned)
        query_mappings.append(mapping)
    return AlignedSubject(
        target_index,
        tuple(aligned_templates),
        tuple(template_mappings),
        tuple(aligned_queries),
        tuple(query_mappings),
    )


def damerau_levenshtein(a: Sequence[str], b: Sequence[str]) -> int:
    """Damerau-Levenshtein distance over key-name sequences.

    Unit-cost insertions, deletions, substitutions and transpositions,
    in the unrestricted (Lowrance-Wagner) form, so the result is a true
    metric: the restricted variant would violate the triangle inequality
    on sequences like ``ca / ac / abc``.
    """
    la, lb = len(a), len(b)
    if la == 0:
        return lb
    if lb == 0:
        return la
    maxdist = la + lb
    # d has two extra rows/cols: index 0 plays the role of "-1".
    d = [[maxdist] * (lb + 2) for _ in range(la + 2)]
    for i in range(la + 1):
        d[i + 1][1] = i
    for j in range(lb + 1):
        d[1][j + 1] = j
    da: dict[str, int] = {}
    for i in range(1, la + 1):
        db = 0
        for j in range(1, lb + 1):
            k = da.get(b[j - 1], 0)
            l = db
            if a[i - 1] == b[j - 1]:
                cost = 0
                db = j
            else:
                cost = 1
            d[i + 1][j + 1] = min(
                d[i][j] + cost,  # substitution / match
                d[i + 1][j] + 1,  # insertion
                d[i][j + 1] + 1,  # deletion
                d[k][l] + (i - k - 1) + 1 + (j - l - 1),  # transposition
            )
        da[a[i - 1]] = i
    return d[la + 1][lb + 1]


@dataclass(frozen=True)
class AuditRow:
    comparison_type: str
    count_total: int
    count_differing: int
    mean_dl: float
    sd_dl: float
    max_dl: int


@dataclass(frozen=True)
class AuditReport:
    rows: tuple[AuditRow, ...]

    def to_tsv(self) -> str:
        lines = [
            "comparison_type\tcount_total\tcount_differing\tmean_dl\tsd_dl\tmax_dl"
        ]
        for r in self.rows:
            lines.append(
                f"{r.comparison_type}\t{r.count_total}\t{r.count_differing}"
                f"\t{r.mean_dl:.6f}\t{r.sd_dl:.6f}\t{r.max_dl}"
            )
        return "\n".join(lines) + "\n"


def _summarize(distances: list[int], comparison_type: str) -> AuditRow:
    total = len(distances)
    if total == 0:
        return AuditRow(comparison_type, 0, 0, 0.0, 0.0, 0)
    differing = sum(1 for x in distances if x > 0)
    mean = sum(distances) / total
    var = sum((x - mean) ** 2 for x in distances) / total
    return AuditRow(comparison_type, total, differing, mean, math.sqrt(var), max(distances))


def audit_dataset(dataset: SubjectDataset) -> AuditReport:
    """Quantify how often sequences that should match do not.

    For every subject, compares the key-name sequences of all template
    pairs and of every query against every template, reporting totals,
    the number of differing pairs, and mean/SD/max Damerau-Levenshtein
    distance for each comparison type.
    """
    tt: list[int] = []
    qt: list[int] = []
    for subject_id in dataset.subject_ids():
        entry = dataset.subjects[subject_id]
        template_keys = [s.sequence.keys() for s in entry.templates]
        query_keys = [s.sequence.keys() for s in entry.queries]
        for a, b in combinations(template_keys, 2):
            tt.append(damerau_levenshtein(a, b))
        for q in query_keys:
            for t in template_keys:
                qt.append(damerau_levenshtein(q, t))
    return AuditReport(
        (
            _summarize(tt, "template-template"),
            _summarize(qt, "query-template"),
        )
    )
