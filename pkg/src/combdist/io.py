"""Reading data and config files; writing CSV and JSON outputs."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .errors import DomainError
from .inference import FrequencyTable, GridSpec, Hyperparams, NormalPrior, PosteriorGrid

SCHEMA_VERSION = 1


class InputError(DomainError):
    """Malformed input file; message carries the line number."""


def read_data_file(path, m: int | None = None) -> FrequencyTable:
    """Load either a ``k,count`` frequency table or raw observations (one k
    per line, which needs ``m``)."""
    text = Path(path).read_text()
    lines = [(i, ln.strip()) for i, ln in enumerate(text.splitlines(), 1)]
    lines = [(i, ln) for i, ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise InputError(f"{path}: no data")
    if lines[0][1].replace(" ", "").lower() == "k,count":
        return _read_frequency_rows(path, lines[1:], m)
    if m is None:
        raise InputError(f"{path}: raw observation files need --m")
    ks = []
    for i, ln in lines:
        try:
            k = int(ln)
        except ValueError:
            raise InputError(f"{path}:{i}: expected an integer, got {ln!r}") from None
        if not 0 <= k <= m:
            raise InputError(f"{path}:{i}: observation {k} outside 0..{m}")
        ks.append(k)
    return FrequencyTable.from_observations(ks, m)


def _read_frequency_rows(path, rows, m):
    seen = {}
    for i, ln in rows:
        parts = [s.strip() for s in ln.split(",")]
        if len(parts) != 2:
            raise InputError(f"{path}:{i}: expected 'k,count', got {ln!r}")
        try:
            k, c = int(parts[0]), int(parts[1])
        except ValueError:
            raise InputError(f"{path}:{i}: non-integer field in {ln!r}") from None
        if k < 0 or c < 0:
            raise InputError(f"{path}:{i}: negative value in {ln!r}")
        if k in seen:
            raise InputError(f"{path}:{i}: duplicate row for k={k}")
        if m is not None and k > m:
            raise InputError(f"{path}:{i}: k={k} exceeds m={m}")
        seen[k] = c
    if not seen:
        raise InputError(f"{path}: frequency table has no rows")
    size = m if m is not None else max(seen)
    if size < 1:
        raise InputError(f"{path}: m must be at least 1")
    counts = tuple(seen.get(k, 0) for k in range(size + 1))
    if sum(counts) == 0:
        raise InputError(f"{path}: frequency table has no observations")
    return FrequencyTable(size, counts)


def read_compositions(path) -> list[tuple]:
    """One composition per line, comma separated."""
    out = []
    for i, ln in enumerate(Path(path).read_text().splitlines(), 1):
        ln = ln.strip()
        if not ln or ln.startswith("#"):
            continue
        try:
            out.append(tuple(int(s) for s in ln.split(",")))
        except ValueError:
            raise InputError(f"{path}:{i}: expected comma-separated integers, got {ln!r}") from None
    if not out:
        raise InputError(f"{path}: no compositions")
    return out


@dataclass(frozen=True)
class RunConfig:
    """Settings for ``fit``; defaults are the standard-normal prior with
    a = b = c = 0 on the default lattice."""

    psi_min: float = -5.0
    psi_max: float = 5.0
    nu_min: float = -4.0
    nu_max: float = 6.0
    psi_points: int = 401
    nu_points: int = 401
    a: float = 0.0
    b: float = 0.0
    c: float = 0.0
    psi_mean: float = 0.0
    psi_var: float = 1.0
    nu_mean: float = 1.0
    nu_var: float = 1.0
    tol: float = 1e-8
    max_iter: int = 100
    fd_step: float = 1e-4
    seed: int = 0
    out: str = ""

    def grid(self) -> GridSpec:
        return GridSpec(self.psi_min, self.psi_max, self.nu_min, self.nu_max,
                        self.psi_points, self.nu_points)

    def prior(self) -> NormalPrior:
        return NormalPrior(self.psi_mean, self.psi_var, self.nu_mean, self.nu_var)

    def hyper(self, m: int) -> Hyperparams:
        return Hyperparams(self.a, self.b, self.c, m)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def read_config(path, base: RunConfig | None = None) -> RunConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    types = {f.name: f.type for f in fields(RunConfig)}
    casts = {"float": float, "int": int, "str": str}
    updates = {}
    for i, raw in enumerate(Path(path).read_text().splitlines(), 1):
        ln = raw.split("#", 1)[0].strip()
        if not ln:
            continue
        if "=" not in ln:
            raise InputError(f"{path}:{i}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in ln.split("=", 1))
        if key not in types:
            raise InputError(f"{path}:{i}: unknown config key {key!r}")
        try:
            updates[key] = casts[types[key]](value)
        except ValueError:
            raise InputError(f"{path}:{i}: bad value for {key}: {value!r}") from None
    cfg = replace(base or RunConfig(), **updates)
    # surface bad grid/prior settings before any work happens
    cfg.grid()
    cfg.prior()
    return cfg


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    buf.write(f"# schema_version: {SCHEMA_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return x


def grid_csv_text(grid: PosteriorGrid) -> str:
    dens = np.exp(grid.log_density)
    rows = (
        (grid.psi_axis[i], grid.nu_axis[j], dens[i, j])
        for i in range(len(grid.psi_axis))
        for j in range(len(grid.nu_axis))
    )
    return csv_text(("psi", "nu", "density"), rows)


def json_text(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def write_atomic(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise
