"""Trace ingestion/serialization and the persistent anchor database.

Formats (all JSON; floats use Python's shortest round-trip repr, so every
write -> read -> write cycle is byte-stable and lossless):

- samples: JSON Lines, one measurement per line with unit-suffixed keys
  ``x_m, y_m, t_ns, rssi_dbm, bssid, traj_id, time_s``. Unknown extra
  fields are ignored on read.
- anchor database: a single JSON document with a ``version`` field,
  building id, records sorted by BSSID, and batch provenance.
- world: a single JSON document describing bounds, walls, anchors,
  entrances, and the measurement/motion parameters.
- snapshots / fixes: JSON Lines used by the localize CLI.

merge_db implements spatial averaging across batches: sample-count-weighted
means of position, offset, and slope.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .clientsolve import ClientFix, ClientMeasurement, ClientSnapshot
from .core import ApRecord, Bounds, Position, RangingSample
from .errors import (
    DatabaseInvariantError,
    MergeError,
    SampleParseError,
    SchemaError,
    UnsupportedVersionError,
)
from .sim.world import MeasurementParams, PdrParams, TrueAp, Wall, WorldSpec

DB_VERSION = 1
WORLD_VERSION = 1

_SAMPLE_FIELDS = ("x_m", "y_m", "t_ns", "rssi_dbm", "bssid", "traj_id", "time_s")
# Stem -> required key, for diagnosing wrong unit suffixes (e.g. t_us).
_UNIT_STEMS = {"x": "x_m", "y": "y_m", "t": "t_ns", "rssi": "rssi_dbm", "time": "time_s"}


def _dumps(obj) -> str:
    return json.dumps(obj, allow_nan=False, separators=(",", ":"))


def sample_to_dict(s: RangingSample) -> dict:
    return {
        "x_m": s.position.x_m,
        "y_m": s.position.y_m,
        "t_ns": s.rtt_ns,
        "rssi_dbm": s.rssi_dbm,
        "bssid": s.bssid,
        "traj_id": s.trajectory_id,
        "time_s": s.time_s,
    }


def write_samples(path: str | Path, samples: Iterable[RangingSample]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for s in samples:
            fh.write(_dumps(sample_to_dict(s)))
            fh.write("\n")


def read_samples(path: str | Path) -> list[RangingSample]:
    out: list[RangingSample] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SampleParseError(line_no, f"invalid JSON: {exc.msg}") from exc
            if not isinstance(obj, dict):
                raise SampleParseError(line_no, "expected a JSON object")
            for key in _SAMPLE_FIELDS:
                if key not in obj:
                    _raise_missing(line_no, key, obj)
            try:
                out.append(
                    RangingSample(
                        position=Position(float(obj["x_m"]), float(obj["y_m"])),
                        rtt_ns=float(obj["t_ns"]),
                        rssi_dbm=float(obj["rssi_dbm"]),
                        bssid=str(obj["bssid"]),
                        trajectory_id=str(obj["traj_id"]),
                        time_s=float(obj["time_s"]),
                    )
                )
            except (TypeError, ValueError) as exc:
                raise SampleParseError(line_no, str(exc)) from exc
    return out


def _raise_missing(line_no: int, key: str, obj: dict) -> None:
    stem = key.split("_")[0]
    if stem in _UNIT_STEMS:
        for present in obj:
            if present != key and present.split("_")[0] == stem:
                raise SchemaError(
                    f"line {line_no}: unit suffix mismatch: expected {key!r}, "
                    f"found {present!r}"
                )
    raise SampleParseError(line_no, f"missing field {key!r}")


@dataclass(frozen=True, slots=True)
class ProvenanceEntry:
    batch_id: str
    sample_count: int
    timestamp: float


@dataclass(frozen=True)
class ApDatabase:
    """Solved anchors for one building, keyed by BSSID."""

    building_id: str
    records: dict[str, ApRecord]
    provenance: tuple[ProvenanceEntry, ...] = ()

    def __post_init__(self):
        for bssid, rec in self.records.items():
            if bssid != rec.bssid:
                raise ValueError(f"record key {bssid!r} != record bssid {rec.bssid!r}")

    def sorted_records(self) -> list[ApRecord]:
        return [self.records[b] for b in sorted(self.records)]


def _record_to_dict(r: ApRecord) -> dict:
    return {
        "bssid": r.bssid,
        "x_m": r.position.x_m,
        "y_m": r.position.y_m,
        "offset_ns": r.offset_ns,
        "slope_ns_per_m": r.slope_ns_per_m,
        "sample_count": r.sample_count,
        "residual_rms_ns": r.residual_rms_ns,
        "spread_m": r.spread_m,
        "low_confidence": r.low_confidence,
    }


def _record_from_dict(obj: dict) -> ApRecord:
    try:
        return ApRecord(
            bssid=str(obj["bssid"]),
            position=Position(float(obj["x_m"]), float(obj["y_m"])),
            offset_ns=float(obj["offset_ns"]),
            slope_ns_per_m=float(obj["slope_ns_per_m"]),
            sample_count=int(obj["sample_count"]),
            residual_rms_ns=float(obj["residual_rms_ns"]),
            spread_m=float(obj["spread_m"]),
            low_confidence=bool(obj["low_confidence"]),
        )
    except KeyError as exc:
        raise DatabaseInvariantError(f"record missing field {exc}") from exc
    except ValueError as exc:
        raise DatabaseInvariantError(str(exc)) from exc


def save_db(path: str | Path, db: ApDatabase) -> None:
    doc = {
        "version": DB_VERSION,
        "building_id": db.building_id,
        "records": [_record_to_dict(r) for r in db.sorted_records()],
        "provenance": [
            {"batch_id": p.batch_id, "sample_count": p.sample_count, "timestamp": p.timestamp}
            for p in db.provenance
        ],
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2, allow_nan=False)
        fh.write("\n")


def load_db(path: str | Path) -> ApDatabase:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    version = doc.get("version")
    if version != DB_VERSION:
        raise UnsupportedVersionError(
            f"database version {version!r} unsupported (expected {DB_VERSION})"
        )
    records = {}
    for obj in doc.get("records", []):
        rec = _record_from_dict(obj)
        records[rec.bssid] = rec
    provenance = tuple(
        ProvenanceEntry(str(p["batch_id"]), int(p["sample_count"]), float(p["timestamp"]))
        for p in doc.get("provenance", [])
    )
    return ApDatabase(
        building_id=str(doc.get("building_id", "")),
        records=records,
        provenance=provenance,
    )


def merge_db(a: ApDatabase, b: ApDatabase) -> ApDatabase:
    """Spatial averaging of two batches for the same building.

    Records present in both inputs are combined with sample-count weights:
    weighted-mean position, offset, and slope; summed counts; residual RMS
    recombined as a weighted RMS. Records unique to one input pass through.
    """
    if a.building_id != b.building_id:
        raise MergeError(
            f"building mismatch: {a.building_id!r} vs {b.building_id!r}"
        )
    merged: dict[str, ApRecord] = {}
    for bssid in sorted(set(a.records) | set(b.records)):
        ra = a.records.get(bssid)
        rb = b.records.get(bssid)
        if ra is None:
            merged[bssid] = rb  # type: ignore[assignment]
        elif rb is None:
            merged[bssid] = ra
        else:
            merged[bssid] = _merge_records(ra, rb)
    provenance = tuple(
        sorted(
            a.provenance + b.provenance,
            key=lambda p: (p.timestamp, p.batch_id, p.sample_count),
        )
    )
    return ApDatabase(building_id=a.building_id, records=merged, provenance=provenance)


def _merge_records(ra: ApRecord, rb: ApRecord) -> ApRecord:
    na, nb = ra.sample_count, rb.sample_count
    total = na + nb
    if total > 0:
        wa = na / total
        wb = nb / total
    else:
        wa = wb = 0.5
    rms = (
        math.sqrt((na * ra.residual_rms_ns**2 + nb * rb.residual_rms_ns**2) / total)
        if total > 0
        else 0.0
    )
    return ApRecord(
        bssid=ra.bssid,
        position=Position(
            wa * ra.position.x_m + wb * rb.position.x_m,
            wa * ra.position.y_m + wb * rb.position.y_m,
        ),
        offset_ns=wa * ra.offset_ns + wb * rb.offset_ns,
        slope_ns_per_m=wa * ra.slope_ns_per_m + wb * rb.slope_ns_per_m,
        sample_count=total,
        residual_rms_ns=rms,
        spread_m=max(ra.spread_m, rb.spread_m),
        low_confidence=ra.low_confidence and rb.low_confidence,
    )


# World documents ------------------------------------------------------------


def world_to_dict(world: WorldSpec) -> dict:
    b = world.bounds
    return {
        "version": WORLD_VERSION,
        "name": world.name,
        "origin_label": world.origin_label,
        "seed": world.seed,
        "bounds": {"x_min_m": b.x_min, "y_min_m": b.y_min, "x_max_m": b.x_max, "y_max_m": b.y_max},
        "walls": [
            {
                "x1_m": w.x1_m,
                "y1_m": w.y1_m,
                "x2_m": w.x2_m,
                "y2_m": w.y2_m,
                "attenuation_db": w.attenuation_db,
                "excess_delay_ns_per_crossing": w.excess_delay_ns_per_crossing,
            }
            for w in world.walls
        ],
        "aps": [
            {
                "bssid": ap.bssid,
                "x_m": ap.position.x_m,
                "y_m": ap.position.y_m,
                "offset_ns": ap.offset_ns,
                "nlos_slope_ns_per_m": ap.nlos_slope_ns_per_m,
                "tx_rssi_dbm_at_1m": ap.tx_rssi_dbm_at_1m,
            }
            for ap in world.aps
        ],
        "entrances": [{"x_m": e.x_m, "y_m": e.y_m} for e in world.entrances],
        "measurement": {
            "rate_hz": world.measurement.rate_hz,
            "rssi_cutoff_dbm": world.measurement.rssi_cutoff_dbm,
            "clock_hz": world.measurement.clock_hz,
            "noise_sigma_ns": world.measurement.noise_sigma_ns,
            "path_loss_exponent": world.measurement.path_loss_exponent,
            "nlos_slope_enabled": world.measurement.nlos_slope_enabled,
            "wall_excess_enabled": world.measurement.wall_excess_enabled,
        },
        "pdr": {
            "speed_m_s": world.pdr.speed_m_s,
            "heading_drift_deg_per_sqrt_m": world.pdr.heading_drift_deg_per_sqrt_m,
            "step_scale_sigma": world.pdr.step_scale_sigma,
            "gps_sigma_m": world.pdr.gps_sigma_m,
            "indoor_truncation_m": world.pdr.indoor_truncation_m,
        },
    }


def world_from_dict(doc: dict) -> WorldSpec:
    version = doc.get("version")
    if version != WORLD_VERSION:
        raise UnsupportedVersionError(
            f"world version {version!r} unsupported (expected {WORLD_VERSION})"
        )
    b = doc["bounds"]
    return WorldSpec(
        bounds=Bounds(
            float(b["x_min_m"]), float(b["y_min_m"]), float(b["x_max_m"]), float(b["y_max_m"])
        ),
        walls=tuple(
            Wall(
                float(w["x1_m"]),
                float(w["y1_m"]),
                float(w["x2_m"]),
                float(w["y2_m"]),
                float(w["attenuation_db"]),
                float(w["excess_delay_ns_per_crossing"]),
            )
            for w in doc.get("walls", [])
        ),
        aps=tuple(
            TrueAp(
                bssid=str(ap["bssid"]),
                position=Position(float(ap["x_m"]), float(ap["y_m"])),
                offset_ns=float(ap["offset_ns"]),
                nlos_slope_ns_per_m=float(ap["nlos_slope_ns_per_m"]),
                tx_rssi_dbm_at_1m=float(ap["tx_rssi_dbm_at_1m"]),
            )
            for ap in doc["aps"]
        ),
        entrances=tuple(
            Position(float(e["x_m"]), float(e["y_m"])) for e in doc["entrances"]
        ),
        seed=int(doc["seed"]),
        measurement=MeasurementParams(**doc.get("measurement", {})),
        pdr=PdrParams(**doc.get("pdr", {})),
        name=str(doc.get("name", "custom")),
        origin_label=str(doc.get("origin_label", "")),
    )


def save_world(path: str | Path, world: WorldSpec) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(world_to_dict(world), fh, indent=2, allow_nan=False)
        fh.write("\n")


def load_world(path: str | Path) -> WorldSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return world_from_dict(json.load(fh))


# Snapshots and fixes ---------------------------------------------------------


def write_snapshots(
    path: str | Path, snapshots: Sequence[tuple[str, ClientSnapshot]]
) -> None:
    """One line per (point_id, snapshot)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for point_id, snap in snapshots:
            doc = {
                "point_id": point_id,
                "label_x_m": snap.label.x_m if snap.label else None,
                "label_y_m": snap.label.y_m if snap.label else None,
                "measurements": [
                    {"t_ns": m.rtt_ns, "rssi_dbm": m.rssi_dbm, "bssid": m.bssid}
                    for m in snap.measurements
                ],
            }
            fh.write(_dumps(doc))
            fh.write("\n")


def read_snapshots(path: str | Path) -> list[tuple[str, ClientSnapshot]]:
    out: list[tuple[str, ClientSnapshot]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SampleParseError(line_no, f"invalid JSON: {exc.msg}") from exc
            try:
                label = None
                if doc.get("label_x_m") is not None:
                    label = Position(float(doc["label_x_m"]), float(doc["label_y_m"]))
                meas = tuple(
                    ClientMeasurement(
                        rtt_ns=float(m["t_ns"]),
                        rssi_dbm=float(m["rssi_dbm"]),
                        bssid=str(m["bssid"]),
                    )
                    for m in doc["measurements"]
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise SampleParseError(line_no, str(exc)) from exc
            out.append((str(doc.get("point_id", f"p{line_no}")), ClientSnapshot(meas, label)))
    return out


def fix_to_dict(point_id: str, fix: ClientFix, label: Position | None) -> dict:
    doc = {
        "point_id": point_id,
        "x_m": fix.position.x_m,
        "y_m": fix.position.y_m,
        "loss_ns2": fix.loss_ns2,
        "matched_aps": fix.matched_ap_count,
        "unknown_bssids": list(fix.unknown_bssids),
        "per_ap": [
            {
                "bssid": r.bssid,
                "mean_rtt_ns": r.mean_rtt_ns,
                "weight": r.weight,
                "distance_m": r.distance_m,
                "residual_ns": r.residual_ns,
            }
            for r in fix.per_ap
        ],
    }
    if label is not None:
        doc["label_x_m"] = label.x_m
        doc["label_y_m"] = label.y_m
        doc["error_m"] = fix.position.distance_to(label)
    return doc


def write_fixes(path: str | Path, rows: Sequence[dict]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in rows:
            fh.write(_dumps(row))
            fh.write("\n")
