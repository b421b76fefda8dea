"""Raw keystroke events, keystroke pairing, and the on-disk event format.

A capture file is a sequence of lines ``<action> <scancode> <delta_ms>``
where action is ``P`` (press) or ``R`` (release), the scancode is lowercase
hex, and delta_ms is the integer interval since the previous event (0 for
the first event). Pairing turns that stream into press-ordered keystrokes
with absolute timestamps; overlapping holds (rollover) are supported.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator

from .errors import PairingError, ParseError
from .scancodes import key_name, scancode_for


class Action(Enum):
    PRESS = "P"
    RELEASE = "R"


class UnreleasedKeyWarning(UserWarning):
    """A press had no matching release; the keystroke was closed at the
    final timestamp of the sample."""


@dataclass(frozen=True)
class RawEvent:
    """One key press or release with its interval since the previous event."""

    action: Action
    scancode: int
    delta_ms: int

    def __post_init__(self) -> None:
        if self.delta_ms < 0:
            raise ValueError(f"delta_ms must be non-negative, got {self.delta_ms}")
        if self.scancode < 0:
            raise ValueError(f"scancode must be non-negative, got {self.scancode}")


@dataclass(frozen=True)
class Keystroke:
    """A paired press/release with absolute millisecond timestamps."""

    key: str
    press_t: int
    release_t: int

    def __post_init__(self) -> None:
        if self.release_t < self.press_t:
            raise ValueError(
                f"release_t {self.release_t} precedes press_t {self.press_t} for {self.key!r}"
            )

    @property
    def duration(self) -> int:
        return self.release_t - self.press_t


@dataclass(frozen=True)
class KeystrokeSequence:
    """An ordered run of keystrokes.

    Unaligned sequences are ordered by press time (non-decreasing).
    Aligned sequences carry target order instead, so press times may go
    backwards; the ``aligned`` flag records which form this is.
    """

    keystrokes: tuple[Keystroke, ...]
    aligned: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "keystrokes", tuple(self.keystrokes))
        if not self.aligned:
            times = [k.press_t for k in self.keystrokes]
            if any(a > b for a, b in zip(times, times[1:])):
                raise ValueError("unaligned sequence must be ordered by press time")

    def __len__(self) -> int:
        return len(self.keystrokes)

    def __iter__(self) -> Iterator[Keystroke]:
        return iter(self.keystrokes)

    def __getitem__(self, i: int) -> Keystroke:
        return self.keystrokes[i]

    def keys(self) -> tuple[str, ...]:
        return tuple(k.key for k in self.keystrokes)


class Role(Enum):
    TEMPLATE = "template"
    QUERY = "query"


class Label(Enum):
    GENUINE = "genuine"
    IMPOSTOR = "impostor"


@dataclass(frozen=True)
class Sample:
    """One captured typing sample with its dataset bookkeeping."""

    subject_id: str
    sample_id: str
    role: Role
    sequence: KeystrokeSequence
    label: Label | None = None

    def __post_init__(self) -> None:
        # Templates are enrollment data and genuine by construction.
        if self.role is Role.TEMPLATE:
            if self.label is Label.IMPOSTOR:
                raise ValueError(
                    f"template {self.subject_id}/{self.sample_id} cannot be labeled impostor"
                )
            if self.label is None:
                object.__setattr__(self, "label", Label.GENUINE)


@dataclass
class SubjectSamples:
    templates: list[Sample] = field(default_factory=list)
    queries: list[Sample] = field(default_factory=list)


@dataclass
class SubjectDataset:
    """All samples for a set of subjects, split into templates and queries."""

    subjects: dict[str, SubjectSamples] = field(default_factory=dict)

    def add(self, sample: Sample) -> None:
        entry = self.subjects.setdefault(sample.subject_id, SubjectSamples())
        if sample.role is Role.TEMPLATE:
            entry.templates.append(sample)
        else:
            entry.queries.append(sample)

    def subject_ids(self) -> list[str]:
        return sorted(self.subjects)

    def n_samples(self) -> int:
        return sum(len(s.templates) + len(s.queries) for s in self.subjects.values())


def parse_raw_events(text: str) -> list[RawEvent]:
    """Parse the canonical event format into raw events.

    Blank lines are skipped. Errors carry the 1-based line number.

    Raises:
        ParseError: wrong field count, unknown action token, bad hex
            scancode, negative delta, or nonzero delta on the first event.
    """
    events: list[RawEvent] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        fields = stripped.split()
        if len(fields) != 3:
            raise ParseError(f"line {lineno}: expected 3 fields, got {len(fields)}: {line!r}")
        action_tok, code_tok, delta_tok = fields
        try:
            action = Action(action_tok)
        except ValueError:
            raise ParseError(f"line {lineno}: unknown action token {action_tok!r}") from None
        try:
            scancode = int(code_tok, 16)
        except ValueError:
            raise ParseError(f"line {lineno}: bad scancode {code_tok!r}") from None
        try:
            delta = int(delta_tok, 10)
        except ValueError:
            raise ParseError(f"line {lineno}: bad delta {delta_tok!r}") from None
        if delta < 0:
            raise ParseError(f"line {lineno}: negative delta {delta}")
        if not events and delta != 0:
            raise ParseError(f"line {lineno}: first event must have delta 0, got {delta}")
        events.append(RawEvent(action, scancode, delta))
    return events


def pair_events(events: list[RawEvent]) -> KeystrokeSequence:
    """Pair presses with releases into a press-ordered keystroke sequence.

    Each press is matched with the earliest subsequent release of the same
    scancode, so holds may overlap (rollover). A repeated press of a key
    that is already down (auto-repeat) closes the open keystroke at the new
    press time and starts a new one. A release with no open press is an
    error; a press that is never released is closed at the final timestamp
    of the sample and reported via :class:`UnreleasedKeyWarning`.
    """
    if not events:
        return KeystrokeSequence(())
    t = 0
    open_by_code: dict[int, tuple[int, int]] = {}  # scancode -> (press_t, open_seq)
    finished: list[tuple[int, int, Keystroke]] = []  # (press_t, open_seq, keystroke)
    open_seq = 0
    for event in events:
        t += event.delta_ms
        code = event.scancode
        if event.action is Action.PRESS:
            if code in open_by_code:
                press_t, seq_no = open_by_code.pop(code)
                finished.append((press_t, seq_no, Keystroke(key_name(code), press_t, t)))
            open_by_code[code] = (t, open_seq)
            open_seq += 1
        else:
            if code not in open_by_code:
                raise PairingError(
                    f"release of {key_name(code)!r} at t={t} with no open press"
                )
            press_t, seq_no = open_by_code.pop(code)
            finished.append((press_t, seq_no, Keystroke(key_name(code), press_t, t)))
    final_t = t
    for code, (press_t, seq_no) in open_by_code.items():
        warnings.warn(
            f"press of {key_name(code)!r} at t={press_t} never released; "
            f"closed at final timestamp {final_t}",
            UnreleasedKeyWarning,
            stacklevel=2,
        )
        finished.append((press_t, seq_no, Keystroke(key_name(code), press_t, final_t)))
    finished.sort(key=lambda item: (item[0], item[1]))
    return KeystrokeSequence(tuple(k for _, _, k in finished))


def serialize_events(seq: KeystrokeSequence) -> str:
    """Render a keystroke sequence back to the canonical event format.

    Only unaligned sequences anchored at t=0 serialize; re-parsing the
    result reproduces the sequence exactly. Ties in time are broken by
    keystroke order with press before release inside one keystroke, which
    keeps zero-duration keystrokes (a quantized clock can produce them)
    unambiguous to re-pair.
    """
    if seq.aligned:
        raise ValueError("aligned sequences do not serialize to the event format")
    if not seq.keystrokes:
        return ""
    first_t = min(k.press_t for k in seq.keystrokes)
    if first_t != 0:
        raise ValueError(f"sequence must be anchored at t=0, first press is {first_t}")
    items: list[tuple[int, int, int, str, int]] = []
    for i, k in enumerate(seq.keystrokes):
        code = scancode_for(k.key)
        items.append((k.press_t, i, 0, "P", code))
        items.append((k.release_t, i, 1, "R", code))
    items.sort(key=lambda item: (item[0], item[1], item[2]))
    lines = []
    prev_t = 0
    for t, _, _, action, code in items:
        lines.append(f"{action} {code:02x} {t - prev_t}")
        prev_t = t
    return "\n".join(lines) + "\n"
