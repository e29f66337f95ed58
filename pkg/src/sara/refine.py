"""Four-stage review refinement cascade.

Stage 0 normalizes and cleans text and drops reviews that clean to
nothing; stage 1 drops reviews written before the app's Gen-AI
integration date; stage 2 drops reviews of three or fewer words; stage 3
keeps only reviews an LLM gateway labels informative. A final threshold
filter drops whole categories that end up with too few informative
reviews.

All text-cleaning patterns live in this module so the exact rules are
auditable in one place. Every stage emits a StageReport whose counts
reconcile exactly (output = input - removed) and the per-category counts
are monotone non-increasing along the cascade.
"""

from __future__ import annotations

import csv
import json
import re
import unicodedata
from dataclasses import dataclass, field, replace
from pathlib import Path

from .corpus import AppRecord, Corpus, Review

INFORMATIVE = "informative"
NON_INFORMATIVE = "non-informative"
UNDECIDED = "undecided"

MIN_TOKENS = 4  # stage 2 keeps reviews of at least this many whitespace tokens

# Emoji and pictograph code point ranges, plus variation selectors, ZWJ and
# regional indicators; kept conservative so letters/digits never match.
_EMOJI_PATTERN = re.compile(
    "["
    "\U0001F000-\U0001F02F"  # mahjong/domino tiles
    "\U0001F0A0-\U0001F0FF"  # playing cards
    "\U0001F300-\U0001F5FF"  # symbols & pictographs
    "\U0001F600-\U0001F64F"  # emoticons
    "\U0001F680-\U0001F6FF"  # transport & map
    "\U0001F700-\U0001F77F"
    "\U0001F780-\U0001F7FF"
    "\U0001F800-\U0001F8FF"
    "\U0001F900-\U0001F9FF"  # supplemental symbols
    "\U0001FA00-\U0001FAFF"
    "\U00002600-\U000027BF"  # misc symbols + dingbats
    "\U0001F1E6-\U0001F1FF"  # regional indicators
    "\U0000FE00-\U0000FE0F"  # variation selectors
    "\U0000200D"             # zero-width joiner
    "\U00002B00-\U00002BFF"  # arrows/stars block used by emoji
    "]+"
)
_URL_PATTERN = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
_USERNAME_PATTERN = re.compile(r"@\w+")
_WHITESPACE_PATTERN = re.compile(r"\s+")


def clean_text(raw: str) -> str:
    """Normalize one review text.

    In order: NFKC unicode normalization; emoji, URL and @username removal
    (each match replaced by a space); commas to spaces; lowercasing;
    whitespace collapsed to single spaces; trim. Idempotent by
    construction (removals are case-insensitive where the later
    lowercasing could otherwise re-expose a match).
    """
    text = unicodedata.normalize("NFKC", raw)
    text = _EMOJI_PATTERN.sub(" ", text)
    text = _URL_PATTERN.sub(" ", text)
    text = _USERNAME_PATTERN.sub(" ", text)
    text = text.replace(",", " ")
    text = text.lower()
    text = _WHITESPACE_PATTERN.sub(" ", text)
    return text.strip()


@dataclass
class StageReport:
    stage: str
    input_count: int
    output_count: int
    removed_count: int
    per_category_counts: dict[str, int] = field(default_factory=dict)
    unknown_app_count: int = 0
    undecided_count: int = 0
    dropped_categories: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.output_count != self.input_count - self.removed_count:
            raise ValueError("stage report counts do not reconcile")
        if min(self.input_count, self.output_count, self.removed_count) < 0:
            raise ValueError("stage report counts must be non-negative")

    def to_dict(self) -> dict:
        return {
            "stage": self.stage,
            "input_count": self.input_count,
            "output_count": self.output_count,
            "removed_count": self.removed_count,
            "per_category_counts": dict(sorted(self.per_category_counts.items())),
            "unknown_app_count": self.unknown_app_count,
            "undecided_count": self.undecided_count,
            "dropped_categories": self.dropped_categories,
        }


def _category_counts(corpus: Corpus, reviews) -> dict[str, int]:
    counts: dict[str, int] = {}
    for review in reviews:
        cat = corpus.category_of(review)
        counts[cat] = counts.get(cat, 0) + 1
    return counts


def stage0(corpus: Corpus) -> tuple[Corpus, StageReport]:
    """Basic cleaning: replace content with clean_text, drop empties."""
    kept = []
    for review in corpus:
        cleaned = clean_text(review.content)
        if cleaned:
            kept.append(replace(review, content=cleaned))
    out = corpus.advanced(kept, "s0")
    report = StageReport(
        "s0", len(corpus), len(kept), len(corpus) - len(kept),
        _category_counts(out, kept),
    )
    return out, report


def stage1_temporal(corpus: Corpus, apps: dict[str, AppRecord]) -> tuple[Corpus, StageReport]:
    """Temporal filtering against each app's Gen-AI integration date.

    A review is kept iff its UTC day is on or after the integration day
    (boundary inclusive). Reviews of temporally excluded apps are removed
    wholesale; reviews of unknown apps are removed and counted separately.
    """
    kept = []
    unknown = 0
    for review in corpus:
        app = apps.get(review.app_id)
        if app is None:
            unknown += 1
            continue
        if app.temporal_excluded:
            continue
        if review.at.date() >= app.integration_date:
            kept.append(review)
    out = corpus.with_apps(apps).advanced(kept, "s1")
    report = StageReport(
        "s1", len(corpus), len(kept), len(corpus) - len(kept),
        _category_counts(out, kept), unknown_app_count=unknown,
    )
    return out, report


def stage2_short(corpus: Corpus) -> tuple[Corpus, StageReport]:
    """Short-review exclusion: keep reviews with at least four tokens."""
    kept = [r for r in corpus if len(r.content.split()) >= MIN_TOKENS]
    out = corpus.advanced(kept, "s2")
    report = StageReport(
        "s2", len(corpus), len(kept), len(corpus) - len(kept),
        _category_counts(out, kept),
    )
    return out, report


def stage3_informative(
    corpus: Corpus,
    gate,
    known_labels: dict[str, str] | None = None,
) -> tuple[Corpus, StageReport, dict[str, str]]:
    """LLM-assisted informativeness filter.

    ``gate`` is an object exposing ``classify_informative(items)`` over
    (review_id, text) pairs, returning a label per id in
    {informative, non-informative, undecided}. Reviews already present in
    ``known_labels`` skip the gateway entirely. Undecided reviews are
    retained (fail-open) and surfaced in the report; only reviews labeled
    non-informative are removed.
    """
    known = dict(known_labels or {})
    pending = [(r.review_id, r.content) for r in corpus if r.review_id not in known]
    labels = dict(known)
    if pending:
        labels.update(gate.classify_informative(pending))

    kept = []
    undecided = 0
    for review in corpus:
        label = labels.get(review.review_id, UNDECIDED)
        if label == NON_INFORMATIVE:
            continue
        if label == UNDECIDED:
            undecided += 1
        kept.append(review)
    out = corpus.advanced(kept, "s3")
    report = StageReport(
        "s3", len(corpus), len(kept), len(corpus) - len(kept),
        _category_counts(out, kept), undecided_count=undecided,
    )
    return out, report, labels


def category_threshold_filter(
    corpus: Corpus, min_reviews: int = 1000
) -> tuple[Corpus, StageReport]:
    """Drop whole categories with fewer than ``min_reviews`` reviews left."""
    counts = _category_counts(corpus, corpus.reviews)
    dropped = sorted(cat for cat, n in counts.items() if n < min_reviews)
    dropped_set = set(dropped)
    kept = [r for r in corpus if corpus.category_of(r) not in dropped_set]
    out = replace(corpus, reviews=tuple(kept))
    report = StageReport(
        corpus.stage, len(corpus), len(kept), len(corpus) - len(kept),
        _category_counts(out, kept), dropped_categories=dropped,
    )
    return out, report


def write_stage_artifacts(corpus: Corpus, report: StageReport, out_dir: str | Path) -> None:
    """Persist <stage>.jsonl plus <stage>.report.json for one stage."""
    from .corpus import write_reviews_jsonl

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_reviews_jsonl(corpus.reviews, out_dir / f"{report.stage}.jsonl")
    with (out_dir / f"{report.stage}.report.json").open("w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_informative_labels(labels: dict[str, str], path: str | Path) -> None:
    """Persist informativeness labels as review_id,label CSV."""
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["review_id", "label"])
        for review_id in sorted(labels):
            writer.writerow([review_id, labels[review_id]])


def read_informative_labels(path: str | Path) -> dict[str, str]:
    labels: dict[str, str] = {}
    with Path(path).open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["review_id", "label"]:
            raise ValueError(f"unexpected label file header: {header}")
        for row in reader:
            if len(row) != 2:
                raise ValueError(f"malformed label row: {row}")
            labels[row[0]] = row[1]
    return labels
