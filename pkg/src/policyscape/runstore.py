"""Durable study storage: design + per-replicate outcomes + manifest, written atomically."""

from __future__ import annotations

import csv
import hashlib
import json
import os
import shutil
import tempfile
import time
from dataclasses import dataclass, field

import numpy as np

from .design import DesignMatrix

STUDY_SCHEMA_VERSION = 1

OUTCOME_COLUMNS = (
    "row_id", "replicate", "cumulative_infections", "cumulative_diagnoses",
    "attack_svi_0", "attack_svi_1", "attack_svi_2", "attack_svi_3",
    "svi_variance", "boosted_fraction",
)
_INT_COLUMNS = {"row_id", "replicate", "cumulative_infections", "cumulative_diagnoses"}


@dataclass
class OutcomeTable:
    """Column store of per-replicate simulation outcomes."""

    columns: dict

    def __post_init__(self):
        missing = set(OUTCOME_COLUMNS) - set(self.columns)
        if missing:
            raise ValueError(f"outcome table missing columns {sorted(missing)}")
        self.validate()

    @property
    def n_rows(self):
        return len(self.columns["row_id"])

    def validate(self):
        row_id = np.asarray(self.columns["row_id"])
        rep = np.asarray(self.columns["replicate"])
        pairs = set(zip(row_id.tolist(), rep.tolist()))
        if len(pairs) != row_id.size:
            raise ValueError("duplicate (row_id, replicate) pairs")
        counts = np.unique(np.unique(row_id, return_counts=True)[1])
        if counts.size > 1:
            raise ValueError("replicate counts differ across design rows")

    def replicate_count(self):
        _, counts = np.unique(np.asarray(self.columns["row_id"]), return_counts=True)
        return int(counts[0]) if counts.size else 0

    @classmethod
    def from_rows(cls, rows):
        """rows: iterable of (row_id, replicate, SimOutcome)."""
        cols = {name: [] for name in OUTCOME_COLUMNS}
        for row_id, rep, outcome in rows:
            record = outcome.to_row()
            cols["row_id"].append(row_id)
            cols["replicate"].append(rep)
            for name in OUTCOME_COLUMNS[2:]:
                cols[name].append(record[name])
        return cls(columns={
            k: np.asarray(v, dtype=np.int64 if k in _INT_COLUMNS else float)
            for k, v in cols.items()})

    def to_csv(self, path):
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(OUTCOME_COLUMNS)
            for i in range(self.n_rows):
                row = []
                for name in OUTCOME_COLUMNS:
                    v = self.columns[name][i]
                    row.append(int(v) if name in _INT_COLUMNS else repr(float(v)))
                w.writerow(row)

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as f:
            r = csv.reader(f)
            header = next(r, None)
            if header is None or tuple(header) != OUTCOME_COLUMNS:
                raise ValueError(f"{path}: unexpected outcome columns {header}")
            cols = {name: [] for name in OUTCOME_COLUMNS}
            for line_no, row in enumerate(r, start=2):
                if len(row) != len(OUTCOME_COLUMNS):
                    raise ValueError(
                        f"{path}: line {line_no}: expected {len(OUTCOME_COLUMNS)} "
                        f"fields, got {len(row)}")
                for name, v in zip(OUTCOME_COLUMNS, row):
                    cols[name].append(v)
        return cls(columns={
            k: np.asarray(v, dtype=np.int64 if k in _INT_COLUMNS else float)
            for k, v in cols.items()})


def _hash_bytes(*chunks):
    h = hashlib.sha256()
    for c in chunks:
        h.update(c)
    return h.hexdigest()


@dataclass
class RunManifest:
    command: str
    config: dict
    seeds: list
    input_hashes: dict = field(default_factory=dict)
    run_id: str = ""
    created_at: str = ""
    schema_version: int = STUDY_SCHEMA_VERSION

    def to_dict(self):
        return {
            "schema_version": self.schema_version,
            "run_id": self.run_id,
            "command": self.command,
            "config": self.config,
            "seeds": list(self.seeds),
            "input_hashes": self.input_hashes,
            "created_at": self.created_at,
        }

    @classmethod
    def from_dict(cls, d):
        version = d.get("schema_version")
        if version is None or version > STUDY_SCHEMA_VERSION:
            raise ValueError(f"unsupported study schema_version {version!r}")
        return cls(
            command=d.get("command", ""),
            config=d.get("config", {}),
            seeds=d.get("seeds", []),
            input_hashes=d.get("input_hashes", {}),
            run_id=d.get("run_id", ""),
            created_at=d.get("created_at", ""),
            schema_version=version,
        )


def write_study(study_dir, design: DesignMatrix, outcomes: OutcomeTable,
                manifest: RunManifest, overwrite=False):
    """Write design.csv, outcomes.csv and manifest.json atomically (temp + rename).

    The run_id is a content hash over the design, outcomes and config, so
    rewriting identical content yields an identical id; timestamps stay out
    of the hash.
    """
    study_dir = str(study_dir)
    design_ids = set(range(design.n))
    outcome_ids = set(np.asarray(outcomes.columns["row_id"]).tolist())
    if design_ids != outcome_ids:
        raise ValueError(
            "design row_ids and outcome row_ids differ "
            f"(design {len(design_ids)} rows, outcomes reference {len(outcome_ids)})")

    if os.path.exists(study_dir) and not overwrite:
        raise FileExistsError(f"study directory {study_dir} already exists")

    parent = os.path.dirname(os.path.abspath(study_dir)) or "."
    os.makedirs(parent, exist_ok=True)
    tmp = tempfile.mkdtemp(prefix=".study-", dir=parent)
    try:
        design.to_csv(os.path.join(tmp, "design.csv"))
        outcomes.to_csv(os.path.join(tmp, "outcomes.csv"))
        with open(os.path.join(tmp, "design.csv"), "rb") as f:
            design_bytes = f.read()
        with open(os.path.join(tmp, "outcomes.csv"), "rb") as f:
            outcome_bytes = f.read()
        manifest.run_id = _hash_bytes(
            design_bytes, outcome_bytes,
            json.dumps(manifest.config, sort_keys=True).encode())
        manifest.created_at = manifest.created_at or time.strftime(
            "%Y-%m-%dT%H:%M:%SZ", time.gmtime())
        with open(os.path.join(tmp, "manifest.json"), "w") as f:
            json.dump(manifest.to_dict(), f, indent=2)
        if os.path.exists(study_dir):
            shutil.rmtree(study_dir)
        os.replace(tmp, study_dir)
    except Exception:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    return study_dir


def load_study(study_dir):
    """Read back (design, outcomes, manifest), validating schema and files."""
    study_dir = str(study_dir)
    for name in ("design.csv", "outcomes.csv", "manifest.json"):
        if not os.path.exists(os.path.join(study_dir, name)):
            raise FileNotFoundError(f"study is missing {name} in {study_dir}")
    with open(os.path.join(study_dir, "manifest.json")) as f:
        manifest = RunManifest.from_dict(json.load(f))
    design = DesignMatrix.from_csv(os.path.join(study_dir, "design.csv"))
    outcomes = OutcomeTable.from_csv(os.path.join(study_dir, "outcomes.csv"))
    return design, outcomes, manifest
