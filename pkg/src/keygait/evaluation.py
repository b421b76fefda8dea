"""ROC/EER computation and the end-to-end scoring pipeline.

A query is accepted as genuine when its score is at or above the
threshold. The ROC is evaluated at every distinct score plus an infinite
lead-in, so it always spans (FAR, FRR) = (0, 1) to (1, 0); the EER is
read off at the exact FAR = FRR point when one exists and by linear
interpolation across the sign change otherwise.

run_pipeline chains alignment, feature extraction and normalization,
detector fit/score, and score normalization per subject. Samples that
cannot be processed are never dropped: they become flagged records with
a sentinel minimal score and count toward failure-to-capture. All
randomness derives from the config's master seed via SHA-256, so a rerun
with the same config and data is bit-identical.
"""

from __future__ import annotations

import hashlib
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .alignment import align, discard_modifiers, select_target, truncate_align
from .config import DetectorConfig, PipelineConfig
from .detectors import build_detector
from .errors import EvaluationError, KeygaitError
from .events import KeystrokeSequence, Label, Role, Sample, SubjectDataset
from .features import extract_features, fit_feature_normalizer, normalize_features
from .scorenorm import ScoreRecord, ScoreSet, apply_normalization

SENTINEL_SCORE = float("-inf")

THREADS_ENV_VAR = "KEYGAIT_THREADS"


def derive_seed(*parts: object) -> int:
    """Stable 63-bit seed from arbitrary parts (SHA-256, not hash())."""
    text = ":".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") % (2**63)


@dataclass(frozen=True)
class RocCurve:
    """Operating points ordered by descending threshold."""

    thresholds: np.ndarray
    far: np.ndarray
    frr: np.ndarray

    def eer(self) -> float:
        d = self.far - self.frr
        i = int(np.searchsorted(d, 0.0, side="left"))
        if i < d.size and d[i] == 0.0:
            return float(self.far[i])
        # d is monotone nondecreasing from -1 to +1, so the sign change
        # brackets i-1 and i.
        j = i - 1
        t = d[j] / (d[j] - d[i])
        return float(self.far[j] + t * (self.far[i] - self.far[j]))

    def to_tsv(self) -> str:
        lines = ["threshold\tfar\tfrr"]
        for t, fa, fr in zip(self.thresholds, self.far, self.frr):
            tt = "inf" if np.isposinf(t) else f"{t:.6f}"
            lines.append(f"{tt}\t{fa:.6f}\t{fr:.6f}")
        return "\n".join(lines) + "\n"


def roc(scores: Sequence[float], genuine: Sequence[bool]) -> RocCurve:
    """ROC over pooled scores with boolean genuine labels.

    Raises:
        EvaluationError: empty input or only one class present.
    """
    s = np.asarray(scores, dtype=np.float64)
    g = np.asarray(genuine, dtype=bool)
    if s.size == 0:
        raise EvaluationError("no scores to evaluate")
    if s.shape != g.shape:
        raise EvaluationError(f"{s.size} scores but {g.size} labels")
    if bool(g.all()) or not bool(g.any()):
        raise EvaluationError("need both genuine and impostor scores")
    gen = np.sort(s[g])
    imp = np.sort(s[~g])
    thresholds = np.concatenate([[np.inf], np.unique(s)[::-1]])
    far = (imp.size - np.searchsorted(imp, thresholds, side="left")) / imp.size
    frr = np.searchsorted(gen, thresholds, side="left") / gen.size
    return RocCurve(thresholds, far, frr)


def _effective_scores(scores: ScoreSet) -> tuple[list[float], list[bool]]:
    values: list[float] = []
    genuine: list[bool] = []
    for r in scores:
        if r.label is None:
            raise EvaluationError(
                f"record {r.subject_id}/{r.sample_id} has no label"
            )
        values.append(
            r.normalized_score if r.normalized_score is not None else r.raw_score
        )
        genuine.append(r.label is Label.GENUINE)
    return values, genuine


def global_eer(scores: ScoreSet) -> float:
    """EER of all scores pooled across subjects."""
    values, genuine = _effective_scores(scores)
    return roc(values, genuine).eer()


@dataclass(frozen=True)
class SubjectEerReport:
    per_subject: dict[str, float]
    mean: float
    sd: float


def subject_eer(scores: ScoreSet) -> SubjectEerReport:
    """Per-subject EERs plus their mean and population SD."""
    per_subject: dict[str, float] = {}
    for subject_id, records in sorted(scores.by_subject().items()):
        values, genuine = _effective_scores(ScoreSet(tuple(records)))
        try:
            per_subject[subject_id] = roc(values, genuine).eer()
        except EvaluationError as exc:
            raise EvaluationError(f"subject {subject_id}: {exc}") from exc
    eers = np.array(list(per_subject.values()))
    return SubjectEerReport(per_subject, float(eers.mean()), float(eers.std()))


@dataclass
class _SubjectFeatures:
    """Per-subject feature preparation result; detector-independent."""

    subject_id: str
    query_ids: list[str]
    query_labels: list[Label | None]
    template_matrix: np.ndarray | None  # None: the whole subject failed
    query_vectors: list[np.ndarray | None]  # None: that query failed


def _aligned_sequences(
    templates: list[KeystrokeSequence],
    queries: list[KeystrokeSequence],
    config: PipelineConfig,
) -> tuple[list[KeystrokeSequence | None], list[KeystrokeSequence | None]]:
    if config.alignment == "discard":
        templates = [discard_modifiers(s) for s in templates]
        queries = [discard_modifiers(s) for s in queries]
    target = templates[select_target(templates)]

    def _one(seq: KeystrokeSequence) -> KeystrokeSequence | None:
        try:
            if config.alignment == "align":
                aligned, _ = align(seq, target, merge_shift_keys=config.merge_shift_keys)
                return aligned
            # truncate, and discard's length equalizer once modifiers are gone
            return truncate_align(seq, target)
        except KeygaitError:
            return None

    return [_one(s) for s in templates], [_one(s) for s in queries]


def _prepare_subject(
    subject_id: str,
    templates: list[Sample],
    queries: list[Sample],
    config: PipelineConfig,
) -> _SubjectFeatures:
    query_ids = [s.sample_id for s in queries]
    query_labels = [s.label for s in queries]
    failed = _SubjectFeatures(subject_id, query_ids, query_labels, None, [None] * len(queries))
    if not templates:
        return failed
    try:
        aligned_t, aligned_q = _aligned_sequences(
            [s.sequence for s in templates], [s.sequence for s in queries], config
        )
    except KeygaitError:
        return failed

    raw_t = []
    for seq in aligned_t:
        if seq is None:
            continue
        try:
            raw_t.append(extract_features(seq))
        except KeygaitError:
            continue
    if not raw_t:
        return failed
    try:
        normalizer = fit_feature_normalizer(
            raw_t, h_f=config.h_f, per_position=config.per_position
        )
        matrix = np.stack([normalize_features(normalizer, v) for v in raw_t])
    except KeygaitError:
        return failed

    vectors: list[np.ndarray | None] = []
    for seq in aligned_q:
        if seq is None:
            vectors.append(None)
            continue
        try:
            vectors.append(normalize_features(normalizer, extract_features(seq)))
        except KeygaitError:
            vectors.append(None)
    return _SubjectFeatures(subject_id, query_ids, query_labels, matrix, vectors)


def _score_subject(
    prepared: _SubjectFeatures, detector_config: DetectorConfig, seed: int
) -> list[ScoreRecord]:
    records: list[ScoreRecord] = []

    def _sentinel(i: int) -> ScoreRecord:
        return ScoreRecord(
            prepared.subject_id,
            prepared.query_ids[i],
            SENTINEL_SCORE,
            label=prepared.query_labels[i],
            flagged=True,
        )

    detector = None
    if prepared.template_matrix is not None:
        try:
            detector = build_detector(detector_config, seed=seed).fit(
                prepared.template_matrix
            )
        except KeygaitError:
            detector = None
    for i, vec in enumerate(prepared.query_vectors):
        if detector is None or vec is None:
            records.append(_sentinel(i))
            continue
        value = detector.score(vec)
        if not np.isfinite(value):
            records.append(_sentinel(i))
            continue
        records.append(
            ScoreRecord(
                prepared.subject_id,
                prepared.query_ids[i],
                float(value),
                label=prepared.query_labels[i],
            )
        )
    return records


def _thread_count() -> int:
    raw = os.environ.get(THREADS_ENV_VAR, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _map_subjects(fn, items: list, threads: int) -> list:
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def run_pipeline(dataset: SubjectDataset, config: PipelineConfig) -> ScoreSet:
    """Score every query in the dataset under one config.

    Per subject: align (or apply the configured baseline), extract and
    normalize features against the subject's templates, fit the detector
    with a seed derived from (master seed, subject id), score the
    queries, then normalize scores per subject. Failed samples come back
    flagged with the sentinel score; record count in == record count out.
    """
    threads = _thread_count()
    subjects = [
        (
            sid,
            sorted(dataset.subjects[sid].templates, key=lambda s: s.sample_id),
            sorted(dataset.subjects[sid].queries, key=lambda s: s.sample_id),
        )
        for sid in dataset.subject_ids()
    ]
    prepared = _map_subjects(
        lambda item: _prepare_subject(item[0], item[1], item[2], config),
        subjects,
        threads,
    )

    ensemble_normalized = (
        config.ensemble_normalized
        and config.detector.name == "ensemble"
        and config.detector.members is not None
    )
    if not ensemble_normalized:
        all_records = _map_subjects(
            lambda p: _score_subject(p, config.detector, derive_seed(config.seed, p.subject_id)),
            prepared,
            threads,
        )
        raw = ScoreSet(tuple(r for sub in all_records for r in sub))
        return apply_normalization(raw, config.score_norm)

    # Ensemble-of-normalized-scores variant: each member produces its own
    # per-subject normalized score set; the ensemble output is their mean.
    assert config.detector.members is not None
    member_sets: list[ScoreSet] = []
    for offset, member in enumerate(config.detector.members):
        member_records = _map_subjects(
            lambda p, _o=offset, _m=member: _score_subject(
                p, _m, derive_seed(config.seed, p.subject_id) + 1 + _o
            ),
            prepared,
            threads,
        )
        raw = ScoreSet(tuple(r for sub in member_records for r in sub))
        member_sets.append(apply_normalization(raw, config.score_norm))
    combined: list[ScoreRecord] = []
    for rows in zip(*(ms.records for ms in member_sets)):
        first = rows[0]
        if any(r.flagged for r in rows):
            combined.append(replace(first, raw_score=SENTINEL_SCORE, normalized_score=0.0, flagged=True))
            continue
        combined.append(
            replace(
                first,
                raw_score=float(np.mean([r.raw_score for r in rows])),
                normalized_score=float(
                    np.mean([r.normalized_score for r in rows])
                ),
            )
        )
    return ScoreSet(tuple(combined))


@dataclass(frozen=True)
class MonteCarloResult:
    mean_eer: float
    sd_eer: float
    eers: tuple[float, ...]


def monte_carlo_validate(
    dataset: SubjectDataset,
    config: PipelineConfig,
    repetitions: int = 10,
    n_templates: int = 4,
    seed: int | None = None,
) -> MonteCarloResult:
    """Repeated random template/query splits of a fully labeled dataset.

    Each repetition draws ``n_templates`` templates per subject uniformly
    without replacement from that subject's genuine samples; everything
    else (remaining genuine plus all impostors) becomes queries. The full
    pipeline runs on each split with a repetition-derived seed and the
    global EER is recorded.

    Raises:
        EvaluationError: a sample is unlabeled, or a subject has fewer
            than n_templates + 1 genuine samples.
    """
    if repetitions < 1:
        raise EvaluationError(f"repetitions must be positive, got {repetitions}")
    master = config.seed if seed is None else seed
    pools: list[tuple[str, list[Sample], list[Sample]]] = []
    for subject_id in dataset.subject_ids():
        entry = dataset.subjects[subject_id]
        samples = list(entry.templates) + list(entry.queries)
        genuine: list[Sample] = []
        impostor: list[Sample] = []
        for s in samples:
            if s.label is Label.GENUINE:
                genuine.append(s)
            elif s.label is Label.IMPOSTOR:
                impostor.append(s)
            else:
                raise EvaluationError(
                    f"sample {subject_id}/{s.sample_id} is unlabeled; "
                    "validation needs full labels"
                )
        if len(genuine) < n_templates + 1:
            raise EvaluationError(
                f"subject {subject_id} has {len(genuine)} genuine samples; "
                f"need at least {n_templates + 1}"
            )
        genuine.sort(key=lambda s: s.sample_id)
        impostor.sort(key=lambda s: s.sample_id)
        pools.append((subject_id, genuine, impostor))

    eers: list[float] = []
    for rep in range(repetitions):
        rep_seed = derive_seed(master, "rep", rep)
        rng = np.random.default_rng(rep_seed)
        split = SubjectDataset()
        for subject_id, genuine, impostor in pools:
            chosen = set(rng.choice(len(genuine), size=n_templates, replace=False).tolist())
            for i, s in enumerate(genuine):
                split.add(replace(s, role=Role.TEMPLATE if i in chosen else Role.QUERY))
            for s in impostor:
                split.add(replace(s, role=Role.QUERY))
        scores = run_pipeline(split, replace(config, seed=rep_seed))
        eers.append(global_eer(scores))
    arr = np.array(eers)
    return MonteCarloResult(float(arr.mean()), float(arr.std()), tuple(eers))
