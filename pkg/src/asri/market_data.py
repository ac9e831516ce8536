"""Input series handling: ingestion, gap repair, mixed-frequency alignment,
publication-lag availability, and snapshot persistence.

Every analysis in this package consumes immutable ``TimeSeries`` values built
here. Series can originate from live HTTP sources or from snapshot CSVs on
disk; both funnel through :func:`ingest_source` so downstream code never sees
the difference.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, replace
from datetime import date, datetime, timedelta, timezone
from enum import Enum
from pathlib import Path

from .errors import DataError

ONE_DAY = timedelta(days=1)

# Confidence scores attached by each fill rule.
CONF_RAW = 1.0
CONF_INTERPOLATED = 0.7
CONF_FORWARD_FILLED = 0.5
CONF_WEEKLY_INTERPOLATED = 0.8
CONF_STALE_ATTESTATION = 0.6

# Gap-length boundaries, in missing interior calendar days.
_INTERP_MAX_GAP = 2       # 1-2 missing days: linear interpolation
_FFILL_MAX_GAP = 7        # 3-7 missing days: forward fill; longer gaps excluded
_STALE_AFTER_DAYS = 45    # monthly attestations lose confidence past this age


class Filled(str, Enum):
    RAW = "raw"
    INTERPOLATED = "interpolated"
    FORWARD_FILLED = "forward_filled"


class Source(str, Enum):
    DEFILLAMA_TVL = "defillama_tvl"
    DEFILLAMA_STABLECOINS = "defillama_stablecoins"
    DEFILLAMA_PROTOCOLS = "defillama_protocols"
    DEFILLAMA_BRIDGES = "defillama_bridges"
    FRED = "fred"
    COINGECKO = "coingecko"
    MANUAL = "manual"


class Frequency(str, Enum):
    DAILY = "daily"
    WEEKLY = "weekly"
    MONTHLY = "monthly"
    QUARTERLY = "quarterly"


_ALLOWED_CONFIDENCE = {
    CONF_RAW,
    CONF_INTERPOLATED,
    CONF_FORWARD_FILLED,
    CONF_WEEKLY_INTERPOLATED,
    CONF_STALE_ATTESTATION,
}


@dataclass(frozen=True, order=True)
class Observation:
    date: date
    value: float
    confidence: float = CONF_RAW
    filled: Filled = Filled.RAW

    def __post_init__(self) -> None:
        if self.confidence not in _ALLOWED_CONFIDENCE:
            raise DataError(
                f"confidence {self.confidence} not one of {sorted(_ALLOWED_CONFIDENCE)}"
            )
        # raw <=> full confidence; every fill rule downgrades
        if (self.filled is Filled.RAW) != (self.confidence == CONF_RAW):
            raise DataError(
                f"filled={self.filled.value} inconsistent with confidence={self.confidence}"
            )


@dataclass(frozen=True)
class PublicationLag:
    """Delay between an observation's date and the moment it is published.

    Sub-daily source lags are expressed in hours; Treasury data uses a
    business-day lag counted on a Mon-Fri calendar (no holiday table).
    """

    hours: float = 0.0
    business_days: int = 0

    def __post_init__(self) -> None:
        if self.hours < 0 or self.business_days < 0:
            raise DataError("publication lag must be non-negative")

    def cutoff(self, target: date) -> date:
        """Latest observation date already published by midnight UTC of ``target``."""
        day = target
        for _ in range(self.business_days):
            day -= ONE_DAY
            while day.weekday() >= 5:  # 5=Sat, 6=Sun
                day -= ONE_DAY
        if self.hours > 0:
            # observations are stamped at midnight UTC; subtract and floor
            moment = datetime.combine(day, datetime.min.time()) - timedelta(hours=self.hours)
            day = moment.date()
        return day


# Default lags for the known upstream sources.
LAG_DEFILLAMA_TVL = PublicationLag(hours=6)
LAG_STABLECOIN_CAP = PublicationLag(hours=12)
LAG_TREASURY = PublicationLag(business_days=2)
LAG_VIX = PublicationLag(hours=24)
LAG_BTC_PRICE = PublicationLag(hours=1)
LAG_NEWS = PublicationLag(hours=2)
LAG_NONE = PublicationLag()


@dataclass(frozen=True)
class SeriesDescriptor:
    series_id: str
    source: Source = Source.MANUAL
    native_frequency: Frequency = Frequency.DAILY
    publication_lag: PublicationLag = LAG_NONE


@dataclass(frozen=True)
class DateRange:
    start: date
    end: date  # inclusive

    def __post_init__(self) -> None:
        if self.end < self.start:
            raise DataError(f"date range end {self.end} before start {self.start}")


@dataclass(frozen=True)
class TimeSeries:
    descriptor: SeriesDescriptor
    points: tuple[Observation, ...] = ()
    gaps: tuple[DateRange, ...] = ()

    def __post_init__(self) -> None:
        for prev, cur in zip(self.points, self.points[1:]):
            if cur.date <= prev.date:
                raise DataError(
                    f"series {self.descriptor.series_id}: dates not strictly increasing "
                    f"at {cur.date}"
                )

    def __len__(self) -> int:
        return len(self.points)

    def values(self) -> list[float]:
        return [p.value for p in self.points]

    def dates(self) -> list[date]:
        return [p.date for p in self.points]

    def at(self, day: date) -> Observation | None:
        lo, hi = 0, len(self.points) - 1
        while lo <= hi:
            mid = (lo + hi) // 2
            d = self.points[mid].date
            if d == day:
                return self.points[mid]
            if d < day:
                lo = mid + 1
            else:
                hi = mid - 1
        return None

    def latest_at_or_before(self, day: date) -> Observation | None:
        lo, hi = 0, len(self.points)
        while lo < hi:
            mid = (lo + hi) // 2
            if self.points[mid].date <= day:
                lo = mid + 1
            else:
                hi = mid
        return self.points[lo - 1] if lo else None


def series_from_values(
    series_id: str,
    dates: list[date],
    values: list[float],
    source: Source = Source.MANUAL,
) -> TimeSeries:
    """Wrap computed (date, value) pairs as a full-confidence series."""
    if len(dates) != len(values):
        raise DataError("dates and values must align")
    descriptor = SeriesDescriptor(series_id=series_id, source=source)
    points = tuple(Observation(d, float(v)) for d, v in zip(dates, values))
    return TimeSeries(descriptor, points)


def ingest_source(
    descriptor: SeriesDescriptor, raw_records: list[tuple[date, float]]
) -> TimeSeries:
    """Sort, de-duplicate, and wrap raw (date, value) records as a series.

    Exact duplicates collapse silently; the same date with two different
    values is a data conflict and both values are reported.
    """
    by_date: dict[date, float] = {}
    for day, value in sorted(raw_records, key=lambda r: r[0]):
        value = float(value)
        if day in by_date and by_date[day] != value:
            raise DataError(
                f"series {descriptor.series_id}: conflicting values for {day}: "
                f"{by_date[day]} vs {value}"
            )
        by_date[day] = value
    points = tuple(Observation(day, by_date[day]) for day in sorted(by_date))
    return TimeSeries(descriptor, points)


def fill_gaps(series: TimeSeries) -> TimeSeries:
    """Repair interior gaps per the data-quality rules.

    Up to 2 missing days: linear interpolation at confidence 0.7.
    3 to 7 missing days: forward fill at confidence 0.5.
    More than 7 missing days: left empty and recorded in ``gaps``.
    Idempotent; a series of fewer than 2 points is returned unchanged.
    """
    if len(series.points) < 2:
        return series
    out: list[Observation] = [series.points[0]]
    gaps: list[DateRange] = []
    for prev, cur in zip(series.points, series.points[1:]):
        missing = (cur.date - prev.date).days - 1
        if missing == 0:
            pass
        elif missing <= _INTERP_MAX_GAP:
            span = (cur.date - prev.date).days
            for k in range(1, missing + 1):
                frac = k / span
                value = prev.value + frac * (cur.value - prev.value)
                out.append(
                    Observation(
                        prev.date + k * ONE_DAY, value, CONF_INTERPOLATED, Filled.INTERPOLATED
                    )
                )
        elif missing <= _FFILL_MAX_GAP:
            for k in range(1, missing + 1):
                out.append(
                    Observation(
                        prev.date + k * ONE_DAY,
                        prev.value,
                        CONF_FORWARD_FILLED,
                        Filled.FORWARD_FILLED,
                    )
                )
        else:
            gaps.append(DateRange(prev.date + ONE_DAY, cur.date - ONE_DAY))
        out.append(cur)
    return TimeSeries(series.descriptor, tuple(out), tuple(gaps))


def interpolate_weekly(series: TimeSeries) -> TimeSeries:
    """Densify a weekly series to daily by linear interpolation at confidence 0.8."""
    if series.descriptor.native_frequency is not Frequency.WEEKLY:
        raise DataError(
            f"series {series.descriptor.series_id} is "
            f"{series.descriptor.native_frequency.value}, not weekly"
        )
    if len(series.points) < 2:
        return series
    out: list[Observation] = [series.points[0]]
    for prev, cur in zip(series.points, series.points[1:]):
        span = (cur.date - prev.date).days
        for k in range(1, span):
            value = prev.value + (k / span) * (cur.value - prev.value)
            out.append(
                Observation(
                    prev.date + k * ONE_DAY,
                    value,
                    CONF_WEEKLY_INTERPOLATED,
                    Filled.INTERPOLATED,
                )
            )
        out.append(cur)
    return TimeSeries(series.descriptor, tuple(out), series.gaps)


def carry_forward_monthly(series: TimeSeries, as_of: date) -> Observation:
    """Latest attestation at or before ``as_of``, downgraded once it goes stale."""
    obs = series.latest_at_or_before(as_of)
    if obs is None:
        raise DataError(
            f"series {series.descriptor.series_id}: no observation at or before {as_of}"
        )
    age = (as_of - obs.date).days
    if age > _STALE_AFTER_DAYS:
        return Observation(as_of, obs.value, CONF_STALE_ATTESTATION, Filled.FORWARD_FILLED)
    return Observation(as_of, obs.value, obs.confidence, obs.filled)


def available_as_of(series: TimeSeries, target: date) -> TimeSeries:
    """Restrict to observations already published by ``target`` (no look-ahead)."""
    cutoff = series.descriptor.publication_lag.cutoff(target)
    points = tuple(p for p in series.points if p.date <= cutoff)
    return TimeSeries(series.descriptor, points, series.gaps)


def shift_t_minus_1(series: TimeSeries) -> TimeSeries:
    """Re-label each midnight-stamped value to the prior day it describes."""
    points = tuple(replace(p, date=p.date - ONE_DAY) for p in series.points)
    gaps = tuple(DateRange(g.start - ONE_DAY, g.end - ONE_DAY) for g in series.gaps)
    return TimeSeries(series.descriptor, points, gaps)


def prepare_series(series: TimeSeries) -> TimeSeries:
    """Apply the repair pipeline a series needs before persistence.

    Weekly series densify to daily; weekday-only FRED series get their
    weekends forward-filled before the general gap rule; monthly and
    quarterly attestations stay sparse and resolve at read time via
    ``carry_forward_monthly``.
    """
    desc = series.descriptor
    if desc.native_frequency in (Frequency.MONTHLY, Frequency.QUARTERLY):
        return series
    if desc.native_frequency is Frequency.WEEKLY:
        return interpolate_weekly(series)
    if desc.source is Source.FRED:
        series = densify_weekdays(series)
    return fill_gaps(series)


def densify_weekdays(series: TimeSeries) -> TimeSeries:
    """Forward-fill weekend holes in a weekday-only series.

    Applied to FRED series before the general gap rule so that ordinary
    weekends never trigger interpolation bookkeeping.
    """
    if len(series.points) < 2:
        return series
    out: list[Observation] = [series.points[0]]
    for prev, cur in zip(series.points, series.points[1:]):
        day = prev.date + ONE_DAY
        while day < cur.date and day.weekday() >= 5:
            out.append(Observation(day, prev.value, CONF_FORWARD_FILLED, Filled.FORWARD_FILLED))
            day += ONE_DAY
        out.append(cur)
    return TimeSeries(series.descriptor, tuple(out), series.gaps)


# ---------------------------------------------------------------------------
# Persistence: one CSV per series plus a JSON provenance sidecar
# ---------------------------------------------------------------------------

CSV_HEADER = "date,value,confidence,filled"


def _format_value(x: float) -> str:
    # repr round-trips exactly, keeping write-read-write byte-identical
    return repr(float(x))


def write_series_csv(series: TimeSeries, path: Path) -> None:
    lines = [CSV_HEADER]
    for p in series.points:
        lines.append(
            f"{p.date.isoformat()},{_format_value(p.value)},"
            f"{_format_value(p.confidence)},{p.filled.value}"
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_series_csv(path: Path, descriptor: SeriesDescriptor) -> TimeSeries:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read series file {path}: {exc}") from exc
    reader = csv.reader(text.splitlines())
    rows = list(reader)
    if not rows or rows[0] != CSV_HEADER.split(","):
        raise DataError(f"{path}: expected header '{CSV_HEADER}'")
    points = []
    for row in rows[1:]:
        if len(row) != 4:
            raise DataError(f"{path}: malformed row {row!r}")
        try:
            points.append(
                Observation(
                    date.fromisoformat(row[0]), float(row[1]), float(row[2]), Filled(row[3])
                )
            )
        except ValueError as exc:
            raise DataError(f"{path}: malformed row {row!r}: {exc}") from exc
    return TimeSeries(descriptor, tuple(points))


def _descriptor_to_json(desc: SeriesDescriptor, gaps: tuple[DateRange, ...]) -> dict:
    return {
        "series_id": desc.series_id,
        "source": desc.source.value,
        "native_frequency": desc.native_frequency.value,
        "publication_lag": {
            "hours": desc.publication_lag.hours,
            "business_days": desc.publication_lag.business_days,
        },
        "gaps": [[g.start.isoformat(), g.end.isoformat()] for g in gaps],
    }


def _descriptor_from_json(obj: dict) -> tuple[SeriesDescriptor, tuple[DateRange, ...]]:
    lag = obj.get("publication_lag", {})
    desc = SeriesDescriptor(
        series_id=obj["series_id"],
        source=Source(obj.get("source", "manual")),
        native_frequency=Frequency(obj.get("native_frequency", "daily")),
        publication_lag=PublicationLag(
            hours=float(lag.get("hours", 0.0)),
            business_days=int(lag.get("business_days", 0)),
        ),
    )
    gaps = tuple(
        DateRange(date.fromisoformat(a), date.fromisoformat(b))
        for a, b in obj.get("gaps", [])
    )
    return desc, gaps


class SnapshotStore:
    """Directory of per-series CSVs with JSON provenance sidecars.

    Layout: ``<root>/series/<series_id>.csv`` and ``<series_id>.json``.
    Writes are atomic at file granularity; readers see immutable values.
    """

    def __init__(self, root: Path):
        self.root = Path(root)
        self.series_dir = self.root / "series"

    def _csv_path(self, series_id: str) -> Path:
        return self.series_dir / f"{series_id}.csv"

    def _sidecar_path(self, series_id: str) -> Path:
        return self.series_dir / f"{series_id}.json"

    def write(self, series: TimeSeries) -> None:
        self.series_dir.mkdir(parents=True, exist_ok=True)
        write_series_csv(series, self._csv_path(series.descriptor.series_id))
        sidecar = _descriptor_to_json(series.descriptor, series.gaps)
        self._sidecar_path(series.descriptor.series_id).write_text(
            json.dumps(sidecar, indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
            newline="\n",
        )

    def read(self, series_id: str) -> TimeSeries:
        sidecar_path = self._sidecar_path(series_id)
        if not sidecar_path.exists():
            raise DataError(f"series {series_id!r} not found under {self.series_dir}")
        desc, gaps = _descriptor_from_json(json.loads(sidecar_path.read_text(encoding="utf-8")))
        series = read_series_csv(self._csv_path(series_id), desc)
        return TimeSeries(desc, series.points, gaps)

    def list_series(self) -> list[str]:
        if not self.series_dir.exists():
            return []
        return sorted(p.stem for p in self.series_dir.glob("*.csv"))

    def has(self, series_id: str) -> bool:
        return self._csv_path(series_id).exists()


# ---------------------------------------------------------------------------
# Source manifest: which series to ingest, from where, with which lag
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ManifestEntry:
    descriptor: SeriesDescriptor
    location: str  # local CSV path or remote endpoint


def load_manifest(path: Path) -> list[ManifestEntry]:
    """Parse a JSON manifest mapping series ids to locations and metadata."""
    if not path.exists():
        raise DataError(f"manifest not found: {path}")
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"manifest {path} is not valid JSON: {exc}") from exc
    entries = []
    for series_id, spec in sorted(obj.get("series", {}).items()):
        lag = spec.get("publication_lag", {})
        entries.append(
            ManifestEntry(
                descriptor=SeriesDescriptor(
                    series_id=series_id,
                    source=Source(spec.get("source", "manual")),
                    native_frequency=Frequency(spec.get("native_frequency", "daily")),
                    publication_lag=PublicationLag(
                        hours=float(lag.get("hours", 0.0)),
                        business_days=int(lag.get("business_days", 0)),
                    ),
                ),
                location=spec.get("location", ""),
            )
        )
    return entries


def ingest_manifest_entry(entry: ManifestEntry, base_dir: Path) -> TimeSeries:
    """Load one manifest entry from its local CSV location."""
    location = Path(entry.location)
    if not location.is_absolute():
        location = base_dir / location
    if not location.exists():
        raise DataError(f"series {entry.descriptor.series_id}: file not found: {location}")
    text = location.read_text(encoding="utf-8")
    rows = list(csv.reader(text.splitlines()))
    if not rows:
        return TimeSeries(entry.descriptor)
    start = 1 if rows[0] and not _is_date(rows[0][0]) else 0
    records = []
    for row in rows[start:]:
        if len(row) < 2:
            raise DataError(f"{location}: malformed row {row!r}")
        try:
            records.append((date.fromisoformat(row[0]), float(row[1])))
        except ValueError as exc:
            raise DataError(f"{location}: malformed row {row!r}: {exc}") from exc
    return prepare_series(ingest_source(entry.descriptor, records))


def _is_date(token: str) -> bool:
    try:
        date.fromisoformat(token)
        return True
    except ValueError:
        return False


# ---------------------------------------------------------------------------
# Remote-source plumbing (optional at runtime; analyses use snapshots only)
# ---------------------------------------------------------------------------

DEFILLAMA_BASE = "https://api.llama.fi"
DEFILLAMA_STABLECOINS_BASE = "https://stablecoins.llama.fi"
ENDPOINT_CHAIN_TVL = "/v2/historicalChainTvl"
ENDPOINT_STABLECOINS = "/stablecoins"
ENDPOINT_PROTOCOLS = "/protocols"
ENDPOINT_BRIDGES = "/bridges"
FRED_SERIES = ("DGS10", "VIXCLS", "T10Y2Y")


class RateLimiter:
    """Sliding-window limiter: at most ``max_requests`` per ``window_seconds``.

    DeFi Llama allows 300 requests per 5 minutes; ``acquire`` blocks (via the
    injected sleep) until a slot frees up.
    """

    def __init__(
        self,
        max_requests: int = 300,
        window_seconds: float = 300.0,
        clock=time.monotonic,
        sleep=time.sleep,
    ):
        if max_requests < 1:
            raise DataError("rate limit must allow at least one request")
        self.max_requests = max_requests
        self.window_seconds = window_seconds
        self._clock = clock
        self._sleep = sleep
        self._stamps: list[float] = []

    def acquire(self) -> None:
        now = self._clock()
        self._stamps = [t for t in self._stamps if now - t < self.window_seconds]
        if len(self._stamps) >= self.max_requests:
            wait = self.window_seconds - (now - self._stamps[0])
            if wait > 0:
                self._sleep(wait)
                now = self._clock()
                self._stamps = [t for t in self._stamps if now - t < self.window_seconds]
        self._stamps.append(self._clock())


def parse_chain_tvl_payload(payload: list[dict]) -> list[tuple[date, float]]:
    """Convert a `/v2/historicalChainTvl` JSON body to (date, value) records."""
    records = []
    for item in payload:
        day = datetime.fromtimestamp(int(item["date"]), tz=timezone.utc).date()
        records.append((day, float(item["tvl"])))
    return records


def parse_fred_payload(payload: dict) -> list[tuple[date, float]]:
    """Convert a FRED observations JSON body; '.' markers are missing values."""
    records = []
    for item in payload.get("observations", []):
        if item.get("value", ".") == ".":
            continue
        records.append((date.fromisoformat(item["date"]), float(item["value"])))
    return records
