"""Scripted regeneration of the toolkit's reference results.

A manifest lists experiments as CLI argument vectors plus expected outputs
with tolerances. The desk profile runs reduced episode counts and skips the
heaviest Monte-Carlo entries (the exact chain analysis stands in for them);
the full profile runs everything at full fidelity. Entries fail
independently; the run always completes and emits a CSV report.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

from . import cli

PROFILES = ("desk", "full")


@dataclass(frozen=True)
class ReproEntry:
    entry_id: str
    argv: list[str]
    profiles: tuple[str, ...]
    episodes: dict
    expect_exit: int
    checks: list[dict]
    provenance: str


@dataclass(frozen=True)
class ReproResult:
    entry_id: str
    status: str  # pass | fail | error | skipped
    detail: str
    provenance: str


def load_manifest(path) -> list[ReproEntry]:
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    entries = []
    for item in raw["entries"]:
        entries.append(
            ReproEntry(
                entry_id=item["id"],
                argv=list(item["argv"]),
                profiles=tuple(item.get("profiles", PROFILES)),
                episodes=dict(item.get("episodes", {})),
                expect_exit=int(item.get("expect_exit", 0)),
                checks=list(item.get("checks", [])),
                provenance=item.get("provenance", ""),
            )
        )
    return entries


def _resolve_path(payload, dotted: str):
    value = payload
    for part in dotted.split("."):
        if isinstance(value, list):
            value = value[int(part)]
        else:
            value = value[part]
    return value


def _check_number(check: dict, out_dir: Path) -> str | None:
    with open(out_dir / check["file"], "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    actual = _resolve_path(payload, check["path"])
    expected = check["expected"]
    if actual is None:
        return f"{check['path']}: value is null"
    rel_tol = check.get("rel_tol")
    abs_tol = check.get("abs_tol")
    if rel_tol is not None:
        if abs(actual - expected) > rel_tol * abs(expected):
            return (
                f"{check['path']}: {actual:.6g} not within {rel_tol:.2%} of "
                f"{expected:.6g}"
            )
    elif abs_tol is not None:
        if abs(actual - expected) > abs_tol:
            return f"{check['path']}: {actual:.6g} != {expected:.6g} (+-{abs_tol:g})"
    elif actual != expected:
        return f"{check['path']}: {actual!r} != {expected!r}"
    return None


def _check_number_max(check: dict, out_dir: Path) -> str | None:
    with open(out_dir / check["file"], "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    actual = _resolve_path(payload, check["path"])
    if actual is None:
        return f"{check['path']}: value is null"
    if actual > check["maximum"]:
        return f"{check['path']}: {actual:.6g} exceeds {check['maximum']:.6g}"
    if "minimum" in check and actual < check["minimum"]:
        return f"{check['path']}: {actual:.6g} below {check['minimum']:.6g}"
    return None


def _check_policy_constant(check: dict, out_dir: Path) -> str | None:
    with open(out_dir / check["file"], "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    expected = list(check["expected_action"])
    offenders = [
        i
        for i, action in enumerate(payload["policy"])
        if action is not None and action != expected
    ]
    if offenders:
        return f"{len(offenders)} states deviate from action {expected}"
    return None


def _check_json_greater(check: dict, out_dir: Path) -> str | None:
    with open(out_dir / check["file"], "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    left = _resolve_path(payload, check["path"])
    right = _resolve_path(payload, check["than_path"])
    if left is None or right is None:
        return "comparison against null value"
    if not left > right:
        return (
            f"{check['path']} = {left:.6g} not greater than "
            f"{check['than_path']} = {right:.6g}"
        )
    return None


def _check_csv_column_all(check: dict, out_dir: Path) -> str | None:
    tol = check.get("abs_tol", 0.0)
    expected = check["expected"]
    with open(out_dir / check["file"], "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for i, row in enumerate(reader):
            actual = float(row[check["column"]])
            if abs(actual - expected) > tol:
                return (
                    f"row {i}: {check['column']} = {actual:.6g}, "
                    f"expected {expected:.6g}"
                )
    return None


_CHECKS = {
    "number": _check_number,
    "number_max": _check_number_max,
    "json_greater": _check_json_greater,
    "policy_constant": _check_policy_constant,
    "csv_column_all": _check_csv_column_all,
}


def run_entry(entry: ReproEntry, profile: str, out_dir: Path, data_dir: Path) -> ReproResult:
    if profile not in entry.profiles:
        return ReproResult(entry.entry_id, "skipped", f"not in {profile} profile", entry.provenance)
    episodes = entry.episodes.get(profile)
    argv = []
    for token in entry.argv:
        token = token.replace("{out}", str(out_dir))
        token = token.replace("{data}", str(data_dir))
        if "{episodes}" in token:
            if episodes is None:
                return ReproResult(
                    entry.entry_id, "error", "no episode count for profile", entry.provenance
                )
            token = token.replace("{episodes}", str(episodes))
        argv.append(token)
    try:
        code = cli.main(argv)
    except SystemExit as exc:  # argparse-level rejections carry their code
        code = int(exc.code) if exc.code is not None else 0
    except Exception as exc:  # entry failures must not abort the run
        return ReproResult(entry.entry_id, "error", f"{type(exc).__name__}: {exc}", entry.provenance)
    if code != entry.expect_exit:
        return ReproResult(
            entry.entry_id,
            "fail",
            f"exit code {code}, expected {entry.expect_exit}",
            entry.provenance,
        )
    for check in entry.checks:
        try:
            problem = _CHECKS[check["kind"]](check, out_dir)
        except Exception as exc:
            return ReproResult(
                entry.entry_id, "error", f"check crashed: {exc}", entry.provenance
            )
        if problem:
            return ReproResult(entry.entry_id, "fail", problem, entry.provenance)
    return ReproResult(entry.entry_id, "pass", "", entry.provenance)


def run_repro(
    manifest_path, profile: str, out_dir, data_dir=None
) -> list[ReproResult]:
    if profile not in PROFILES:
        raise ValueError(f"profile must be one of {PROFILES}")
    manifest_path = Path(manifest_path)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    data_dir = Path(data_dir) if data_dir is not None else manifest_path.parent
    results = []
    for entry in load_manifest(manifest_path):
        result = run_entry(entry, profile, out_dir, data_dir)
        results.append(result)
        print(f"[{result.status:>7}] {result.entry_id}"
              + (f" ({result.detail})" if result.detail else ""))
    return results


def write_report(results: list[ReproResult], path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "status", "detail", "provenance"])
        for r in results:
            writer.writerow([r.entry_id, r.status, r.detail, r.provenance])
