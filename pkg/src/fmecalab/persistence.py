"""Durable campaign bundles: plain directories a round can be re-analyzed from.

A bundle is human-readable structured text plus verbatim clinical text
files. ``manifest.json`` records a (byte-length, sha256) pair for every
managed file; annotation logs are append-only JSON lines, and the manifest
digest covers exactly the acknowledged prefix, so a torn tail from a crash
is recoverable while any corruption inside the prefix is rejected.

Writes follow durable-before-ack: log line fsynced, then manifest replaced
atomically, then the caller sees the result. One writer per bundle is
enforced with a pid lock file; plain readers (``load_campaign``) do not
take the lock.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import socket
import threading
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path

from .campaign import (AnnotationMatrix, AnnotationRecord, Campaign,
                       FailureInstance, Reviewer, Round, SummaryDocument)
from .errors import (FormatVersionError, IntegrityError, LockError, ParseError,
                     ReferentialError, SchemaError, ValidationError)
from .sus import SusResponse
from .taxonomy import (default_merge_map, default_taxonomy, load_merge_map,
                       load_taxonomy)

FORMAT_VERSION = 1
SUPPORTED_FORMAT_VERSIONS = (1,)

MANIFEST = "manifest.json"
LOCK_FILE = ".lock"
MATRIX_MAGIC = "# fmecalab-matrix"

_REVIEWER_KEYS = {"id", "display_name", "role"}
_ROUND_KEYS = {"id", "taxonomy_version", "reviewer_ids", "summary_ids", "status"}
_SUMMARY_KEYS = {"id", "metadata", "source_file", "summary_file"}
_RECORD_KEYS = {"round_id", "reviewer_id", "summary_id", "flags", "instances",
                "record_version", "submitted"}
_INSTANCE_KEYS = {"failure_mode_id", "comment", "severity", "detectability"}
_TOKEN_KEYS = {"token", "principal", "operator", "expires_at"}


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _fsync_dir(path: Path) -> None:
    fd = os.open(path, os.O_RDONLY)
    try:
        os.fsync(fd)
    finally:
        os.close(fd)


def _atomic_write(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(data)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)
    _fsync_dir(path.parent)


def _check_keys(doc: dict, allowed: set, where: str, file: str) -> None:
    """Reject unknown fields instead of ignoring them (forward-compat policy)."""
    if not isinstance(doc, dict):
        raise SchemaError(f"{where} must be an object", file=file, field=where)
    unknown = sorted(set(doc) - allowed)
    if unknown:
        raise SchemaError(
            f"{where} carries unsupported field(s) {unknown}; this reader "
            f"handles bundle format {FORMAT_VERSION}",
            file=file, field=f"{where}.{unknown[0]}")


def _require(doc: dict, key: str, where: str, file: str):
    if key not in doc:
        raise SchemaError(f"{where} is missing required field {key!r}",
                          file=file, field=f"{where}.{key}")
    return doc[key]


def record_to_doc(record: AnnotationRecord) -> dict:
    return {
        "round_id": record.round_id,
        "reviewer_id": record.reviewer_id,
        "summary_id": record.summary_id,
        "flags": dict(sorted(record.flags.items())),
        "instances": [asdict(i) for i in record.instances],
        "record_version": record.record_version,
        "submitted": record.submitted,
    }


def record_from_doc(doc: dict, file: str, where: str) -> AnnotationRecord:
    _check_keys(doc, _RECORD_KEYS, where, file)
    instances = []
    for i, inst in enumerate(_require(doc, "instances", where, file)):
        _check_keys(inst, _INSTANCE_KEYS, f"{where}.instances[{i}]", file)
        instances.append(FailureInstance(
            failure_mode_id=_require(inst, "failure_mode_id",
                                     f"{where}.instances[{i}]", file),
            comment=inst.get("comment", ""),
            severity=_require(inst, "severity", f"{where}.instances[{i}]", file),
            detectability=_require(inst, "detectability",
                                   f"{where}.instances[{i}]", file)))
    version = _require(doc, "record_version", where, file)
    if not isinstance(version, int) or isinstance(version, bool):
        raise SchemaError(f"{where}.record_version must be an integer",
                          file=file, field=f"{where}.record_version")
    submitted = _require(doc, "submitted", where, file)
    if not isinstance(submitted, bool):
        raise SchemaError(f"{where}.submitted must be a boolean",
                          file=file, field=f"{where}.submitted")
    return AnnotationRecord(
        round_id=_require(doc, "round_id", where, file),
        reviewer_id=_require(doc, "reviewer_id", where, file),
        summary_id=_require(doc, "summary_id", where, file),
        flags=dict(_require(doc, "flags", where, file)),
        instances=tuple(instances),
        record_version=version,
        submitted=submitted)


def _log_relpath(round_id: str, reviewer_id: str) -> str:
    return f"logs/{round_id}/{reviewer_id}.jsonl"


class AuthTable:
    """Operator-issued static tokens mapping to principals."""

    def __init__(self):
        self.tokens: dict[str, dict] = {}

    def issue(self, token: str, principal: str, operator: bool,
              expires_at: str | None = None) -> None:
        self.tokens[token] = {"token": token, "principal": principal,
                              "operator": operator, "expires_at": expires_at}

    def lookup(self, token: str) -> dict | None:
        entry = self.tokens.get(token)
        if entry is None:
            return None
        expiry = entry.get("expires_at")
        if expiry is not None:
            if datetime.now(timezone.utc) >= datetime.fromisoformat(expiry):
                return None
        return entry

    def to_doc(self) -> dict:
        return {"tokens": [self.tokens[t] for t in sorted(self.tokens)]}

    @classmethod
    def from_doc(cls, doc: dict, file: str) -> "AuthTable":
        _check_keys(doc, {"tokens"}, "auth", file)
        table = cls()
        for i, entry in enumerate(doc.get("tokens", [])):
            _check_keys(entry, _TOKEN_KEYS, f"auth.tokens[{i}]", file)
            table.tokens[entry["token"]] = dict(entry)
        return table


class CampaignStore:
    """Single-writer durable facade over an in-memory :class:`Campaign`.

    Every mutation is applied in memory first (validation, compare-and-swap),
    then written to disk and fsynced before the call returns; if the disk
    write fails, the in-memory change is rolled back and the error re-raised.
    """

    def __init__(self, path: Path, campaign: Campaign, manifest_files: dict,
                 auth: AuthTable, created_at: str, take_lock: bool = True):
        self.path = Path(path)
        self.campaign = campaign
        self.auth = auth
        self.created_at = created_at
        self._files = manifest_files
        self._log_state: dict[str, tuple[int, "hashlib._Hash"]] = {}
        # serializes disk writes; the engine's own lock only covers memory
        self._mutex = threading.Lock()
        self._locked = False
        if take_lock:
            self._acquire_lock()

    # -- lifecycle -----------------------------------------------------------

    @classmethod
    def create(cls, path: str | Path, campaign_id: str) -> "CampaignStore":
        path = Path(path)
        if path.exists() and any(path.iterdir()):
            raise ValidationError(f"destination {path} is not empty",
                                  path=str(path))
        path.mkdir(parents=True, exist_ok=True)
        for sub in ("summaries", "logs", "taxonomy", "reports"):
            (path / sub).mkdir(exist_ok=True)
        campaign = Campaign(campaign_id)
        store = cls(path, campaign, {}, AuthTable(), campaign.created_at)
        for version in (1, 3):
            doc = json.dumps(_taxonomy_doc(default_taxonomy(version)),
                             indent=2, sort_keys=True) + "\n"
            store._write(f"taxonomy/v{version}.json", doc.encode())
        merge = default_merge_map(1, 3)
        store._write("taxonomy/merge_v1_to_v3.json",
                     (json.dumps(_merge_doc(merge), indent=2, sort_keys=True)
                      + "\n").encode())
        store._flush_registries()
        return store

    @classmethod
    def open_bundle(cls, path: str | Path) -> "CampaignStore":
        path = Path(path)
        campaign, files, auth, created_at = _load(path)
        store = cls(path, campaign, files, auth, created_at)
        store._seed_log_state()
        return store

    def close(self) -> None:
        if self._locked:
            try:
                (self.path / LOCK_FILE).unlink()
            except FileNotFoundError:
                pass
            self._locked = False

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _acquire_lock(self) -> None:
        lock_path = self.path / LOCK_FILE
        payload = json.dumps({"pid": os.getpid(), "host": socket.gethostname(),
                              "acquired_at": datetime.now(timezone.utc).isoformat()})
        while True:
            try:
                fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
            except FileExistsError:
                if self._lock_is_stale(lock_path):
                    continue
                holder = lock_path.read_text(encoding="utf-8", errors="replace")
                raise LockError(
                    f"bundle {self.path} is locked by another writer: {holder.strip()}",
                    path=str(lock_path)) from None
            with os.fdopen(fd, "w") as fh:
                fh.write(payload)
                fh.flush()
                os.fsync(fh.fileno())
            self._locked = True
            return

    def _lock_is_stale(self, lock_path: Path) -> bool:
        try:
            holder = json.loads(lock_path.read_text(encoding="utf-8"))
            pid = int(holder["pid"])
            host = holder.get("host")
        except (OSError, ValueError, KeyError, TypeError):
            # unreadable lock: treat as stale only if it can be removed
            try:
                lock_path.unlink()
                return True
            except OSError:
                return False
        if host is not None and host != socket.gethostname():
            return False
        try:
            os.kill(pid, 0)
        except ProcessLookupError:
            try:
                lock_path.unlink()
                return True
            except FileNotFoundError:
                return True
            except OSError:
                return False
        except PermissionError:
            return False
        return False

    # -- low-level file management -------------------------------------------

    def _write(self, relpath: str, data: bytes) -> None:
        target = self.path / relpath
        target.parent.mkdir(parents=True, exist_ok=True)
        _atomic_write(target, data)
        self._files[relpath] = {"bytes": len(data), "sha256": _sha256(data)}

    def _write_manifest(self) -> None:
        doc = {"format_version": FORMAT_VERSION,
               "campaign_id": self.campaign.id,
               "created_at": self.created_at,
               "files": {k: self._files[k] for k in sorted(self._files)}}
        _atomic_write(self.path / MANIFEST,
                      (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode())

    def _seed_log_state(self) -> None:
        for relpath, entry in self._files.items():
            if not relpath.startswith("logs/"):
                continue
            data = (self.path / relpath).read_bytes()[:entry["bytes"]]
            digest = hashlib.sha256(data)
            self._log_state[relpath] = (len(data), digest)

    def _append_log(self, relpath: str, line: bytes) -> None:
        target = self.path / relpath
        target.parent.mkdir(parents=True, exist_ok=True)
        size, digest = self._log_state.get(relpath, (0, hashlib.sha256()))
        # existing file may carry an unacknowledged torn tail; append after
        # the acknowledged prefix only
        with open(target, "r+b" if target.exists() else "wb") as fh:
            fh.seek(size)
            fh.truncate()
            fh.write(line)
            fh.flush()
            os.fsync(fh.fileno())
        digest = digest.copy()
        digest.update(line)
        self._log_state[relpath] = (size + len(line), digest)
        self._files[relpath] = {"bytes": size + len(line),
                                "sha256": digest.hexdigest()}

    def _flush_registries(self) -> None:
        c = self.campaign
        reviewers = {"reviewers": [asdict(c.reviewer(r)) for r in c.reviewer_ids()]}
        rounds = {"rounds": [{
            "id": rid,
            "taxonomy_version": c.round(rid).taxonomy_version,
            "reviewer_ids": sorted(c.round(rid).reviewer_ids),
            "summary_ids": sorted(c.round(rid).summary_ids),
            "status": c.round(rid).status,
        } for rid in c.round_ids()]}
        index = {"summaries": [{
            "id": sid,
            "metadata": c.summary(sid).metadata,
            "source_file": f"summaries/{sid}.source.txt",
            "summary_file": f"summaries/{sid}.summary.txt",
        } for sid in c.summary_ids()]}
        sus_doc = {"responses": [{"evaluator_id": r.evaluator_id,
                                  "items": list(r.items)}
                                 for r in c.sus_responses()]}
        self._write("reviewers.json",
                    (json.dumps(reviewers, indent=2, sort_keys=True) + "\n").encode())
        self._write("rounds.json",
                    (json.dumps(rounds, indent=2, sort_keys=True) + "\n").encode())
        self._write("summaries/index.json",
                    (json.dumps(index, indent=2, sort_keys=True) + "\n").encode())
        self._write("sus.json",
                    (json.dumps(sus_doc, indent=2, sort_keys=True) + "\n").encode())
        self._write("auth.json",
                    (json.dumps(self.auth.to_doc(), indent=2, sort_keys=True)
                     + "\n").encode())
        self._write_manifest()

    # -- mutations ------------------------------------------------------------

    def add_summary(self, doc: SummaryDocument) -> SummaryDocument:
        with self._mutex:
            stored = self.campaign.add_summary(doc)
            try:
                self._write(f"summaries/{doc.id}.source.txt",
                            doc.source_text.encode("utf-8"))
                self._write(f"summaries/{doc.id}.summary.txt",
                            doc.generated_summary.encode("utf-8"))
                self._flush_registries()
            except Exception:
                self.campaign._summaries.pop(doc.id, None)
                raise
            return stored

    def add_reviewer(self, reviewer: Reviewer) -> Reviewer:
        with self._mutex:
            stored = self.campaign.add_reviewer(reviewer)
            try:
                self._flush_registries()
            except Exception:
                self.campaign._reviewers.pop(reviewer.id, None)
                raise
            return stored

    def issue_token(self, token: str, principal: str, operator: bool,
                    expires_at: str | None = None) -> None:
        with self._mutex:
            self.auth.issue(token, principal, operator, expires_at)
            self._flush_registries()

    def open_round(self, round_id: str, taxonomy_version: int,
                   reviewer_ids=None, summary_ids=None) -> Round:
        with self._mutex:
            rnd = self.campaign.open_round(round_id, taxonomy_version,
                                           reviewer_ids, summary_ids)
            try:
                self._flush_registries()
            except Exception:
                self.campaign._rounds.pop(round_id, None)
                raise
            return rnd

    def close_round(self, round_id: str, force: bool = False) -> Round:
        with self._mutex:
            previous = self.campaign.round(round_id)
            rnd = self.campaign.close_round(round_id, force)
            try:
                self._flush_registries()
            except Exception:
                self.campaign._rounds[round_id] = previous
                raise
            return rnd

    def record_annotation(self, record: AnnotationRecord,
                          expected_version: int) -> AnnotationRecord:
        with self._mutex:
            previous = self.campaign.peek_record(record.round_id,
                                                 record.reviewer_id,
                                                 record.summary_id)
            stored = self.campaign.record_annotation(record, expected_version)
            line = (json.dumps(record_to_doc(stored), sort_keys=True)
                    + "\n").encode()
            try:
                self._append_log(_log_relpath(stored.round_id,
                                              stored.reviewer_id), line)
                self._write_manifest()
            except Exception:
                self.campaign.restore_record(record.round_id, record.reviewer_id,
                                             record.summary_id, previous)
                raise
            return stored

    def add_sus_response(self, response: SusResponse):
        with self._mutex:
            result = self.campaign.add_sus_response(response)
            try:
                self._flush_registries()
            except Exception:
                self.campaign._sus_responses.pop()
                raise
            return result


def _taxonomy_doc(taxonomy) -> dict:
    return {
        "version": taxonomy.version,
        "provenance": taxonomy.provenance,
        "categories": [asdict(c) for c in taxonomy.categories],
        "subcategories": [asdict(s) for s in taxonomy.subcategories],
        "failure_modes": [{"id": m.id, "label": m.label,
                           "subcategory_id": m.subcategory_id,
                           "description": m.description,
                           "illustrative_examples": list(m.illustrative_examples)}
                          for m in taxonomy.failure_modes],
    }


def _merge_doc(merge) -> dict:
    return {"from_version": merge.from_version, "to_version": merge.to_version,
            "mapping": dict(sorted(merge.mapping.items())),
            "inferred": sorted(merge.inferred), "notes": merge.notes}


# -- bundle loading ------------------------------------------------------------

def _read_manifest(path: Path) -> dict:
    manifest_path = path / MANIFEST
    if not manifest_path.exists():
        raise SchemaError(f"{path} is not a campaign bundle (no {MANIFEST})",
                          file=MANIFEST, field="manifest")
    try:
        doc = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{MANIFEST} is not valid JSON: {exc}",
                         file=MANIFEST) from None
    _check_keys(doc, {"format_version", "campaign_id", "created_at", "files"},
                "manifest", MANIFEST)
    version = _require(doc, "format_version", "manifest", MANIFEST)
    if version not in SUPPORTED_FORMAT_VERSIONS:
        supported = ", ".join(str(v) for v in SUPPORTED_FORMAT_VERSIONS)
        raise FormatVersionError(
            f"bundle format {version} is not supported (supported: {supported})",
            found=version, supported=list(SUPPORTED_FORMAT_VERSIONS))
    for relpath, entry in _require(doc, "files", "manifest", MANIFEST).items():
        _check_keys(entry, {"bytes", "sha256"}, f"files[{relpath}]", MANIFEST)
        _require(entry, "bytes", f"files[{relpath}]", MANIFEST)
        _require(entry, "sha256", f"files[{relpath}]", MANIFEST)
    return doc


def _verify_file(path: Path, relpath: str, entry: dict) -> bytes:
    target = path / relpath
    if not target.exists():
        raise IntegrityError(f"manifest references missing file {relpath}",
                             file=relpath)
    data = target.read_bytes()
    expected_len = entry["bytes"]
    is_log = relpath.startswith("logs/")
    if is_log:
        if len(data) < expected_len:
            raise IntegrityError(
                f"{relpath} is shorter than its acknowledged prefix "
                f"({len(data)} < {expected_len} bytes)", file=relpath)
        prefix = data[:expected_len]
        if _sha256(prefix) != entry["sha256"]:
            raise IntegrityError(f"{relpath} content digest mismatch within "
                                 "the acknowledged prefix", file=relpath)
        return data
    if len(data) != expected_len or _sha256(data) != entry["sha256"]:
        raise IntegrityError(f"{relpath} content digest mismatch", file=relpath)
    return data


def _load_json(data: bytes, relpath: str) -> dict:
    try:
        return json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"{relpath} is not valid JSON: {exc}", file=relpath) \
            from None


def _parse_log(data: bytes, acked_bytes: int, relpath: str) -> list[dict]:
    """Parse the acknowledged prefix; bytes past it were never acked.

    A crash can leave a tail after the acknowledged prefix (the write
    landed but the manifest update did not). That tail was never
    acknowledged to any client, so it is ignored here and truncated by the
    next writer append. Corruption inside the prefix is rejected.
    """
    prefix = data[:acked_bytes]
    if prefix and not prefix.endswith(b"\n"):
        raise IntegrityError(
            f"{relpath}: acknowledged prefix does not end at a line boundary",
            file=relpath)
    entries = []
    for line_no, raw in enumerate(prefix.splitlines(), start=1):
        try:
            entries.append(json.loads(raw.decode("utf-8")))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ParseError(f"{relpath}:{line_no}: corrupt log entry: {exc}",
                             file=relpath, line=line_no) from None
    return entries


def _load(path: Path):
    path = Path(path)
    manifest = _read_manifest(path)
    files = dict(manifest["files"])
    contents = {relpath: _verify_file(path, relpath, entry)
                for relpath, entry in files.items()}

    campaign = Campaign(manifest["campaign_id"], manifest["created_at"])

    for relpath in sorted(contents):
        if relpath.startswith("taxonomy/v"):
            campaign.register_taxonomy(load_taxonomy(path / relpath))

    auth = AuthTable()
    if "auth.json" in contents:
        auth = AuthTable.from_doc(_load_json(contents["auth.json"], "auth.json"),
                                  "auth.json")

    index_doc = _load_json(contents.get("summaries/index.json", b'{"summaries": []}'),
                           "summaries/index.json")
    _check_keys(index_doc, {"summaries"}, "summaries", "summaries/index.json")
    for i, entry in enumerate(index_doc.get("summaries", [])):
        _check_keys(entry, _SUMMARY_KEYS, f"summaries[{i}]", "summaries/index.json")
        source_file = _require(entry, "source_file", f"summaries[{i}]",
                               "summaries/index.json")
        summary_file = _require(entry, "summary_file", f"summaries[{i}]",
                                "summaries/index.json")
        for ref in (source_file, summary_file):
            if ref not in contents:
                raise ReferentialError(
                    f"summary {entry.get('id')!r} references missing file {ref}",
                    file="summaries/index.json", ref=ref)
        campaign.add_summary(SummaryDocument(
            id=_require(entry, "id", f"summaries[{i}]", "summaries/index.json"),
            source_text=contents[source_file].decode("utf-8"),
            generated_summary=contents[summary_file].decode("utf-8"),
            metadata=entry.get("metadata", {})))

    reviewers_doc = _load_json(contents.get("reviewers.json", b'{"reviewers": []}'),
                               "reviewers.json")
    _check_keys(reviewers_doc, {"reviewers"}, "reviewers", "reviewers.json")
    for i, entry in enumerate(reviewers_doc.get("reviewers", [])):
        _check_keys(entry, _REVIEWER_KEYS, f"reviewers[{i}]", "reviewers.json")
        campaign.add_reviewer(Reviewer(
            id=_require(entry, "id", f"reviewers[{i}]", "reviewers.json"),
            display_name=entry.get("display_name", ""),
            role=entry.get("role", "")))

    rounds_doc = _load_json(contents.get("rounds.json", b'{"rounds": []}'),
                            "rounds.json")
    _check_keys(rounds_doc, {"rounds"}, "rounds", "rounds.json")
    final_status = {}
    for i, entry in enumerate(rounds_doc.get("rounds", [])):
        _check_keys(entry, _ROUND_KEYS, f"rounds[{i}]", "rounds.json")
        rid = _require(entry, "id", f"rounds[{i}]", "rounds.json")
        campaign.open_round(rid,
                            _require(entry, "taxonomy_version", f"rounds[{i}]",
                                     "rounds.json"),
                            entry.get("reviewer_ids"),
                            entry.get("summary_ids"))
        final_status[rid] = _require(entry, "status", f"rounds[{i}]", "rounds.json")

    sus_doc = _load_json(contents.get("sus.json", b'{"responses": []}'), "sus.json")
    _check_keys(sus_doc, {"responses"}, "sus", "sus.json")
    for i, entry in enumerate(sus_doc.get("responses", [])):
        _check_keys(entry, {"evaluator_id", "items"}, f"responses[{i}]", "sus.json")
        campaign.add_sus_response(SusResponse(
            evaluator_id=_require(entry, "evaluator_id", f"responses[{i}]",
                                  "sus.json"),
            items=tuple(_require(entry, "items", f"responses[{i}]", "sus.json"))))

    # replay annotation logs through full validation, then pin final statuses
    for relpath in sorted(contents):
        if not relpath.startswith("logs/"):
            continue
        entries = _parse_log(contents[relpath], files[relpath]["bytes"], relpath)
        for line_no, doc in enumerate(entries, start=1):
            where = f"log entry {line_no}"
            record = record_from_doc(doc, relpath, where)
            expected = f"logs/{record.round_id}/{record.reviewer_id}.jsonl"
            if relpath != expected:
                raise ReferentialError(
                    f"{relpath}:{line_no}: entry belongs to {expected}",
                    file=relpath, line=line_no)
            current = campaign.peek_record(record.round_id, record.reviewer_id,
                                           record.summary_id)
            if current is None:
                # a compacted bundle's log may start mid-history at any version
                if record.record_version < 1:
                    raise IntegrityError(
                        f"{relpath}:{line_no}: record version must be >= 1, "
                        f"got {record.record_version}", file=relpath, line=line_no)
                baseline = 0
            else:
                baseline = current.record_version
                if record.record_version != baseline + 1:
                    raise IntegrityError(
                        f"{relpath}:{line_no}: log versions must increase by "
                        f"exactly 1 ({record.record_version} after {baseline})",
                        file=relpath, line=line_no)
            campaign.record_annotation(record, baseline)
            # keep the acknowledged version number, not a renumbered one
            campaign.restore_record(record.round_id, record.reviewer_id,
                                    record.summary_id, record)

    for rid, status in final_status.items():
        if status == "closed":
            campaign.close_round(rid, force=True)
        elif status != "open":
            raise SchemaError(f"round {rid!r} has unknown status {status!r}",
                              file="rounds.json", field="status")

    return campaign, files, auth, manifest["created_at"]


def load_campaign(path: str | Path) -> Campaign:
    """Read-only load; does not take the writer lock."""
    campaign, _, _, _ = _load(Path(path))
    return campaign


def save_campaign(campaign: Campaign, path: str | Path,
                  auth: AuthTable | None = None) -> Path:
    """Write the full in-memory state as a fresh bundle at ``path``.

    The annotation logs are rebuilt from the latest record versions; use a
    long-lived :class:`CampaignStore` to retain full version history.
    """
    path = Path(path)
    store = CampaignStore.create(path, campaign.id)
    try:
        store.created_at = campaign.created_at
        store.campaign = campaign
        if auth is not None:
            store.auth = auth
        for record in campaign.iter_records():
            line = (json.dumps(record_to_doc(record), sort_keys=True) + "\n").encode()
            store._append_log(_log_relpath(record.round_id, record.reviewer_id),
                              line)
        for sid in campaign.summary_ids():
            doc = campaign.summary(sid)
            store._write(f"summaries/{sid}.source.txt",
                         doc.source_text.encode("utf-8"))
            store._write(f"summaries/{sid}.summary.txt",
                         doc.generated_summary.encode("utf-8"))
        store._flush_registries()
    finally:
        store.close()
    return path


# -- matrix interchange ---------------------------------------------------------

def _matrix_header(matrix: AnnotationMatrix) -> str:
    bits = [MATRIX_MAGIC, f"stage={matrix.stage}"]
    if matrix.dimension is not None:
        bits.append(f"dimension={matrix.dimension}")
    return " ".join(bits)


def _cell_text(matrix: AnnotationMatrix, value) -> str:
    if value is None:
        return ""
    if matrix.stage in (1, 2):
        return "1" if value else "0"
    return str(value)


def export_matrix(matrix: AnnotationMatrix, path: str | Path) -> Path:
    """Write a matrix as delimiter-separated text (UTF-8, LF, header row)."""
    out = io.StringIO()
    out.write(_matrix_header(matrix) + "\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["summary_id", "unit_id", *matrix.rater_axis])
    for (summary_id, unit_id), row in zip(matrix.unit_axis, matrix.cells):
        writer.writerow([summary_id, unit_id,
                         *(_cell_text(matrix, v) for v in row)])
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(out.getvalue().encode("utf-8"))
    return path


def _parse_cell(token: str, stage: int, line_no: int, path_name: str):
    token = token.strip()
    if token == "":
        return None
    if stage in (1, 2):
        if token in ("0", "1"):
            return token == "1"
        raise ParseError(f"{path_name}:{line_no}: binary cell must be 0 or 1, "
                         f"got {token!r}", file=path_name, line=line_no)
    if token in ("1", "2", "3", "4", "5"):
        return int(token)
    raise ParseError(f"{path_name}:{line_no}: ordinal cell must be 1..5 or "
                     f"empty, got {token!r}", file=path_name, line=line_no)


def import_ratings(path: str | Path, stage: int) -> AnnotationMatrix:
    """Read a matrix file back; the declared stage must match ``stage``."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    lines = text.split("\n")
    if not lines or not lines[0].startswith(MATRIX_MAGIC):
        raise ParseError(f"{path.name}:1: missing '{MATRIX_MAGIC}' marker line",
                         file=path.name, line=1)
    declared: dict[str, str] = {}
    for token in lines[0][len(MATRIX_MAGIC):].split():
        key, _, value = token.partition("=")
        declared[key] = value
    try:
        declared_stage = int(declared.get("stage", ""))
    except ValueError:
        raise ParseError(f"{path.name}:1: marker line lacks a stage",
                         file=path.name, line=1) from None
    if declared_stage != stage:
        raise SchemaError(
            f"{path.name} declares stage {declared_stage}, expected {stage}",
            file=path.name, field="stage")
    dimension = declared.get("dimension")

    reader = csv.reader(io.StringIO("\n".join(lines[1:])))
    rows = list(reader)
    if not rows:
        raise SchemaError(f"{path.name}: missing header row", file=path.name,
                          field="header")
    header = rows[0]
    if len(header) < 3 or header[:2] != ["summary_id", "unit_id"]:
        raise SchemaError(
            f"{path.name}: header must start with summary_id,unit_id and "
            "carry at least one rater column", file=path.name, field="header")
    raters = tuple(header[2:])
    unit_axis = []
    cells = []
    for i, row in enumerate(rows[1:], start=3):
        if not row:
            continue
        if len(row) != len(header):
            raise SchemaError(
                f"{path.name}:{i}: row has {len(row)} columns, header has "
                f"{len(header)}", file=path.name, line=i)
        unit_axis.append((row[0], row[1]))
        cells.append(tuple(_parse_cell(tok, stage, i, path.name)
                           for tok in row[2:]))
    return AnnotationMatrix(stage, tuple(unit_axis), raters, tuple(cells),
                            dimension=dimension)
