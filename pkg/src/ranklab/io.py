"""File formats, the external-procedure protocol and run reports.

Profile JSON::

    {"n": 3, "m": 1, "matrices": [[[0, 1, 1], [0, 0, 1], [0, 0, 0]]]}

Profile CSV: one file per individual, n lines of n comma-separated numbers,
no header. Blank lines and lines starting with ``#`` are ignored.

Floats are written with Python's shortest round-trip repr, so a written
profile parses back bit for bit.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import shlex
import subprocess
import time
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, ProtocolError, ValidationError
from .paretian import ParetianSet, build_paretian
from .procedures import ProcedureHandle
from .profile import Profile, ScoreVector, validate_profile


def number(x: float) -> int | float:
    """Integral floats as JSON integers, everything else unchanged."""
    x = float(x)
    if x.is_integer() and abs(x) < 2**53:
        return int(x)
    return x


def numbers(values) -> list:
    return [number(v) for v in np.ravel(values)]


def dumps(obj) -> str:
    return json.dumps(obj, allow_nan=False)


# --- profiles ---------------------------------------------------------------


def profile_to_dict(profile: Profile) -> dict:
    mats = [[numbers(row) for row in mat] for mat in profile.matrices]
    return {"n": profile.n, "m": profile.m, "matrices": mats}


def profile_from_dict(data) -> Profile:
    if not isinstance(data, dict) or not {"n", "m", "matrices"} <= data.keys():
        raise ValidationError('profile JSON needs keys "n", "m" and "matrices"')
    n, m = data["n"], data["m"]
    if not (isinstance(n, int) and isinstance(m, int)):
        raise DimensionMismatch('"n" and "m" must be integers')
    try:
        mats = np.array(data["matrices"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise DimensionMismatch("matrices must be a rectangular array of numbers") from exc
    return validate_profile(n, m, mats)


def dumps_profile(profile: Profile) -> str:
    return dumps(profile_to_dict(profile))


def loads_profile(text: str) -> Profile:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid profile JSON: {exc}") from exc
    return profile_from_dict(data)


def matrix_to_csv(matrix: np.ndarray) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in matrix:
        writer.writerow(repr(v) for v in numbers(row))
    return buf.getvalue()


def matrix_from_csv(text: str) -> np.ndarray:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    try:
        rows = [[float(cell) for cell in row] for row in csv.reader(lines)]
    except ValueError as exc:
        raise ValidationError(f"invalid CSV number: {exc}") from exc
    if not rows or any(len(r) != len(rows) for r in rows):
        raise DimensionMismatch("a CSV matrix must be square and non-empty")
    return np.array(rows)


def read_profile(paths: str | Path | Sequence[str | Path], stdin=None) -> Profile:
    """One JSON file (``-`` reads standard input) or one CSV file per individual."""
    if isinstance(paths, (str, Path)):
        paths = [paths]
    paths = [str(p) for p in paths]
    if len(paths) == 1 and not paths[0].lower().endswith(".csv"):
        if paths[0] == "-":
            import sys

            return loads_profile((stdin or sys.stdin).read())
        return loads_profile(Path(paths[0]).read_text())
    if not all(p.lower().endswith(".csv") for p in paths):
        raise ValidationError("several inputs must all be CSV matrices")
    mats = [matrix_from_csv(Path(p).read_text()) for p in paths]
    if len({m.shape for m in mats}) != 1:
        raise DimensionMismatch("CSV matrices differ in size")
    return Profile(np.stack(mats))


def write_profile_csv(profile: Profile, stem: str | Path) -> list[Path]:
    """Write ``<stem>_1.csv`` ... ``<stem>_m.csv``."""
    out = []
    for p, mat in enumerate(profile.matrices, start=1):
        path = Path(f"{stem}_{p}.csv")
        path.write_text(matrix_to_csv(mat))
        out.append(path)
    return out


def read_vector(path: str | Path) -> list[float]:
    """A JSON list of numbers, or numbers separated by commas or whitespace."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        data = text.replace(",", " ").split()
    if isinstance(data, dict):
        data = data.get("scores", data.get("weights"))
    try:
        return [float(x) for x in data]
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{path}: expected a list of numbers") from exc


# --- Paretian sets ----------------------------------------------------------


def paretian_from_dict(data) -> ParetianSet:
    if not isinstance(data, dict) or not {"points", "values"} <= data.keys():
        raise ValidationError('Paretian JSON needs keys "points" and "values"')
    pts = np.array(data["points"], dtype=float)
    k = data.get("k", pts.shape[-1] if pts.ndim == 2 else None)
    if pts.ndim != 2 or pts.shape[1] != k:
        raise DimensionMismatch(f"points must be a list of {k}-vectors")
    return build_paretian(pts, data["values"], data.get("f_min"), data.get("f_max"))


def paretian_to_dict(pset: ParetianSet) -> dict:
    return {
        "k": pset.k,
        "points": [numbers(p) for p in pset.points],
        "values": numbers(pset.values),
        "f_min": number(pset.f_min),
        "f_max": number(pset.f_max),
    }


def read_queries(path: str | Path) -> np.ndarray:
    """Query points: a JSON list of vectors (or {"points": [...]}) or CSV rows."""
    text = Path(path).read_text()
    if str(path).lower().endswith(".csv"):
        lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
        rows = [[float(c) for c in row] for row in csv.reader(lines)]
    else:
        data = json.loads(text)
        rows = data.get("points", data.get("queries")) if isinstance(data, dict) else data
    q = np.array(rows, dtype=float)
    if q.ndim == 1:
        q = q[None, :]
    if q.ndim != 2:
        raise DimensionMismatch("queries must be a list of vectors")
    return q


# --- external procedures ----------------------------------------------------


def parse_scores(text: str, n: int) -> ScoreVector:
    """Validate a procedure's stdout: ``{"scores": [n finite numbers]}``."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"output is not JSON: {exc}") from exc
    if not isinstance(data, dict) or not isinstance(data.get("scores"), list):
        raise ProtocolError('output must be an object with a "scores" list')
    raw = data["scores"]
    if len(raw) != n:
        raise ProtocolError(f"expected {n} scores, got {len(raw)}")
    if not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in raw):
        raise ProtocolError("scores must be numbers")
    s = np.array(raw, dtype=float)
    if not np.isfinite(s).all():
        raise ProtocolError("scores must be finite")
    return ScoreVector(s)


def external_procedure(command: str, timeout: float = 60.0, cwd: str | None = None) -> ProcedureHandle:
    """A procedure run as a subprocess: profile JSON on stdin, scores JSON on stdout.

    Results are cached per profile, since the harness scores the same profile
    more than once.
    """
    argv = shlex.split(command)
    if not argv:
        raise ValidationError("empty --exec command")
    cache: dict[bytes, ScoreVector] = {}

    def run(profile: Profile) -> ScoreVector:
        key = profile.matrices.tobytes() + bytes(str(profile.matrices.shape), "ascii")
        if key in cache:
            return cache[key]
        try:
            done = subprocess.run(
                argv, input=dumps_profile(profile), capture_output=True,
                text=True, timeout=timeout, cwd=cwd,
            )
        except (OSError, subprocess.TimeoutExpired) as exc:
            raise ProtocolError(f"could not run {command!r}: {exc}") from exc
        if done.returncode != 0:
            raise ProtocolError(f"{command!r} exited with status {done.returncode}: {done.stderr.strip()[:200]}")
        cache[key] = parse_scores(done.stdout, profile.n)
        return cache[key]

    return ProcedureHandle(f"exec:{command}", run)


# --- run reports ------------------------------------------------------------


@dataclass
class RunReport:
    """What a CLI run did: enough to re-run it and compare results."""

    command: list[str]
    config: dict
    results: dict = field(default_factory=dict)
    seconds: float = 0.0
    started: float = field(default_factory=time.time)

    @property
    def config_hash(self) -> str:
        canon = json.dumps(self.config, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "config": self.config,
            "config_hash": self.config_hash,
            "results": self.results,
            "seconds": round(self.seconds, 6),
        }

    def write(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, allow_nan=False) + "\n")

    @classmethod
    def read(cls, path: str | Path) -> RunReport:
        data = json.loads(Path(path).read_text())
        return cls(data["command"], data["config"], data.get("results", {}), data.get("seconds", 0.0))
