"""Canonical review/app data model and JSONL ingestion.

Reviews and app metadata arrive as line-delimited JSON dumps (one record
per line). Loading never aborts on bad records (only on unreadable files
or duplicate app ids): every rejected line is reported with its line
number and reason so a load is fully auditable. A loaded corpus is
immutable; refinement stages produce new corpora whose stage tag only
ever advances raw -> s0 -> s1 -> s2 -> s3.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from datetime import date, datetime, timezone
from pathlib import Path
from typing import Iterable, Iterator

PLATFORMS = ("gps", "astore")
STAGES = ("raw", "s0", "s1", "s2", "s3")

# Google Play apps with no verifiable feature-introduction date get the
# screening month's first day as a conservative earliest bound.
GPS_FALLBACK_DATE = date(2024, 10, 1)

UNCATEGORIZED = "uncategorized"


class CorpusError(Exception):
    """Fatal ingestion problem (unreadable file, duplicate app id, bad stage)."""


@dataclass(frozen=True)
class Review:
    review_id: str
    app_id: str
    content: str
    score: int
    at: datetime
    platform: str
    reply_content: str | None = None
    replied_at: datetime | None = None

    def to_record(self) -> dict:
        rec = {
            "review_id": self.review_id,
            "app_id": self.app_id,
            "content": self.content,
            "score": self.score,
            "at": _format_ts(self.at),
            "platform": self.platform,
        }
        if self.reply_content is not None:
            rec["reply_content"] = self.reply_content
        if self.replied_at is not None:
            rec["replied_at"] = _format_ts(self.replied_at)
        return rec


@dataclass(frozen=True)
class AppRecord:
    app_id: str
    name: str
    category: str
    platform: str
    integration_date: date | None
    # how the date was obtained: recorded from the dump, fallback-assigned
    # (gps only), or excluded from temporal filtering (astore without date)
    date_flag: str = "recorded"

    @property
    def temporal_excluded(self) -> bool:
        return self.date_flag == "excluded"

    def to_record(self) -> dict:
        rec = {
            "app_id": self.app_id,
            "name": self.name,
            "category": self.category,
            "platform": self.platform,
            "date_flag": self.date_flag,
        }
        if self.integration_date is not None:
            rec["integration_date"] = self.integration_date.isoformat()
        return rec


@dataclass(frozen=True)
class Corpus:
    reviews: tuple[Review, ...]
    apps: dict[str, AppRecord] = field(default_factory=dict)
    stage: str = "raw"

    def __len__(self) -> int:
        return len(self.reviews)

    def __iter__(self) -> Iterator[Review]:
        return iter(self.reviews)

    def with_apps(self, apps: dict[str, AppRecord]) -> "Corpus":
        return replace(self, apps=dict(apps))

    def advanced(self, reviews: Iterable[Review], stage: str) -> "Corpus":
        """New corpus at a later stage; transitions may only move forward."""
        if stage not in STAGES:
            raise CorpusError(f"unknown stage: {stage!r}")
        if STAGES.index(stage) <= STAGES.index(self.stage):
            raise CorpusError(f"stage may only advance, not {self.stage} -> {stage}")
        return Corpus(tuple(reviews), self.apps, stage)

    def category_of(self, review: Review) -> str:
        app = self.apps.get(review.app_id)
        return app.category if app else UNCATEGORIZED


@dataclass(frozen=True)
class Reject:
    line: int
    reason: str

    def to_record(self) -> dict:
        return {"line": self.line, "reason": self.reason}


@dataclass
class LoadReport:
    path: str
    total_lines: int
    loaded: int
    rejects: list[Reject]

    @property
    def rejected(self) -> int:
        return len(self.rejects)

    def to_dict(self) -> dict:
        return {
            "path": self.path,
            "total_lines": self.total_lines,
            "loaded": self.loaded,
            "rejected": self.rejected,
            "rejects": [r.to_record() for r in self.rejects],
        }


def _format_ts(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


def parse_timestamp(raw: str) -> datetime:
    """Parse an ISO-8601 timestamp; the timezone is mandatory, storage is UTC."""
    ts = datetime.fromisoformat(str(raw).replace("Z", "+00:00"))
    if ts.tzinfo is None:
        raise ValueError("timestamp has no timezone")
    return ts.astimezone(timezone.utc)


def _parse_review(rec: dict, platform: str) -> Review:
    for key in ("review_id", "app_id", "score", "at"):
        if key not in rec or rec[key] in (None, ""):
            raise ValueError(f"missing field: {key}")
    score = rec["score"]
    if not isinstance(score, int) or isinstance(score, bool) or not 1 <= score <= 5:
        raise ValueError(f"score outside 1-5: {score!r}")
    at = parse_timestamp(rec["at"])
    rec_platform = rec.get("platform")
    if rec_platform is not None and rec_platform != platform:
        raise ValueError(f"platform mismatch: record says {rec_platform!r}")
    reply_content = rec.get("reply_content")
    replied_at_raw = rec.get("replied_at")
    replied_at = None
    if replied_at_raw is not None:
        if reply_content is None:
            raise ValueError("replied_at present without reply_content")
        replied_at = parse_timestamp(replied_at_raw)
    return Review(
        review_id=str(rec["review_id"]),
        app_id=str(rec["app_id"]),
        content=str(rec.get("content", "")),
        score=score,
        at=at,
        platform=platform,
        reply_content=reply_content,
        replied_at=replied_at,
    )


def load_reviews(path: str | Path, platform: str) -> tuple[Corpus, LoadReport]:
    """Load a reviews.jsonl dump into a raw-stage corpus.

    Input order is preserved; every malformed line becomes a reject entry
    (line number + reason) instead of aborting. A duplicate review_id on
    the same platform rejects the second occurrence.
    """
    if platform not in PLATFORMS:
        raise CorpusError(f"unknown platform: {platform!r}")
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise CorpusError(f"cannot read {path}: {exc}") from exc

    reviews: list[Review] = []
    rejects: list[Reject] = []
    seen: set[str] = set()
    total = 0
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        total += 1
        try:
            rec = json.loads(line)
            if not isinstance(rec, dict):
                raise ValueError("record is not a JSON object")
            review = _parse_review(rec, platform)
        except (json.JSONDecodeError, ValueError, TypeError) as exc:
            rejects.append(Reject(lineno, str(exc)))
            continue
        if review.review_id in seen:
            rejects.append(Reject(lineno, f"duplicate review_id: {review.review_id}"))
            continue
        seen.add(review.review_id)
        reviews.append(review)

    report = LoadReport(str(path), total, len(reviews), rejects)
    return Corpus(tuple(reviews)), report


def load_apps(path: str | Path) -> tuple[dict[str, AppRecord], LoadReport]:
    """Load an apps.jsonl dump into an app_id -> AppRecord table.

    Missing integration dates: gps apps get the fixed fallback date,
    astore apps are flagged excluded from temporal filtering. A duplicate
    app_id is fatal; an unparseable date rejects the record.
    """
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise CorpusError(f"cannot read {path}: {exc}") from exc

    apps: dict[str, AppRecord] = {}
    rejects: list[Reject] = []
    total = 0
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        total += 1
        try:
            rec = json.loads(line)
            if not isinstance(rec, dict):
                raise ValueError("record is not a JSON object")
            app_id = str(rec["app_id"])
            platform = rec.get("platform")
            if platform not in PLATFORMS:
                raise ValueError(f"unknown platform: {platform!r}")
            raw_date = rec.get("integration_date")
            if raw_date:
                integration = date.fromisoformat(str(raw_date))
                flag = "recorded"
            elif platform == "gps":
                integration = GPS_FALLBACK_DATE
                flag = "fallback"
            else:
                integration = None
                flag = "excluded"
            record = AppRecord(
                app_id=app_id,
                name=str(rec.get("name", app_id)),
                category=str(rec.get("category", UNCATEGORIZED)),
                platform=platform,
                integration_date=integration,
                date_flag=flag,
            )
        except KeyError as exc:
            rejects.append(Reject(lineno, f"missing field: {exc.args[0]}"))
            continue
        except (json.JSONDecodeError, ValueError, TypeError) as exc:
            rejects.append(Reject(lineno, str(exc)))
            continue
        if record.app_id in apps:
            raise CorpusError(f"duplicate app_id at line {lineno}: {record.app_id}")
        apps[record.app_id] = record

    report = LoadReport(str(path), total, len(apps), rejects)
    return apps, report


def partition_by_category(corpus: Corpus) -> dict[str, list[Review]]:
    """Group reviews by their app's store category.

    Reviews whose app is unknown or uncategorized land in the
    "uncategorized" bucket. The buckets are disjoint and their union is
    the input, in input order.
    """
    buckets: dict[str, list[Review]] = {}
    for review in corpus:
        buckets.setdefault(corpus.category_of(review), []).append(review)
    return buckets


def write_reviews_jsonl(reviews: Iterable[Review], path: str | Path) -> int:
    """Serialize reviews one JSON object per line; returns the line count."""
    path = Path(path)
    n = 0
    with path.open("w", encoding="utf-8") as fh:
        for review in reviews:
            fh.write(json.dumps(review.to_record(), ensure_ascii=False, sort_keys=True))
            fh.write("\n")
            n += 1
    return n


def write_apps_jsonl(apps: dict[str, AppRecord], path: str | Path) -> int:
    path = Path(path)
    n = 0
    with path.open("w", encoding="utf-8") as fh:
        for app_id in sorted(apps):
            fh.write(json.dumps(apps[app_id].to_record(), ensure_ascii=False, sort_keys=True))
            fh.write("\n")
            n += 1
    return n


def write_reject_report(report: LoadReport, path: str | Path) -> None:
    """Reject report as JSONL of {line, reason}."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for reject in report.rejects:
            fh.write(json.dumps(reject.to_record(), ensure_ascii=False, sort_keys=True))
            fh.write("\n")
