"""Dataset, chain and manifest files."""

from __future__ import annotations

import csv
import json
import math
import os
import platform
import sys
import tempfile
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .mcmc import ChainOutput
from .model import OrdinalDataset

__all__ = [
    "DataError",
    "RunManifest",
    "load_dataset",
    "save_dataset",
    "write_chain",
    "read_chain",
    "atomic_write_text",
    "fmt",
]


class DataError(ValueError):
    """Malformed input file."""


def fmt(v: float) -> str:
    """17 significant digits: round-trips every double exactly."""
    return format(float(v), ".17g")


def atomic_write_text(path: str | os.PathLike, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# datasets


def load_dataset(path: str | os.PathLike, y_column: str = "y", intercept: bool = False) -> OrdinalDataset:
    """Read a header CSV with an integer outcome column and numeric covariates.

    With ``intercept`` a column of ones named ``intercept`` is prepended.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        rows = list(reader)
    if y_column not in header:
        raise DataError(f"{path}: no '{y_column}' column in header {header}")
    yi = header.index(y_column)
    names = [h for i, h in enumerate(header) if i != yi]
    if not names and not intercept:
        raise DataError(f"{path}: no covariate columns")
    X = np.empty((len(rows), len(names)))
    y = np.empty(len(rows), dtype=int)
    for r, row in enumerate(rows, start=2):  # header is line 1
        if len(row) != len(header):
            raise DataError(f"{path}: line {r} has {len(row)} fields, expected {len(header)}")
        try:
            yv = float(row[yi])
        except ValueError:
            raise DataError(f"{path}: line {r}: outcome {row[yi]!r} is not a number") from None
        if not math.isfinite(yv) or yv != int(yv):
            raise DataError(f"{path}: line {r}: outcome {row[yi]!r} is not an integer")
        y[r - 2] = int(yv)
        vals = [c for i, c in enumerate(row) if i != yi]
        for j, cell in enumerate(vals):
            try:
                v = float(cell)
            except ValueError:
                raise DataError(f"{path}: line {r}: column '{names[j]}' value {cell!r} is not numeric") from None
            if not math.isfinite(v):
                raise DataError(f"{path}: line {r}: column '{names[j]}' is NaN or infinite")
            X[r - 2, j] = v
    if y.size == 0:
        raise DataError(f"{path}: no data rows")
    if y.min() < 1:
        bad = int(np.argmax(y < 1)) + 2
        raise DataError(f"{path}: categories must start at 1 (line {bad} has y={y[bad - 2]})")
    J = int(y.max())
    if J < 3:
        raise DataError(f"{path}: need at least 3 outcome categories, found {J}")
    counts = np.bincount(y, minlength=J + 1)[1:]
    missing = [j + 1 for j, c in enumerate(counts) if c == 0]
    if missing:
        raise DataError(f"{path}: categories {missing} have no observations")
    if intercept:
        X = np.column_stack([np.ones(len(y)), X])
        names = ["intercept"] + names
    if X.shape[0] < X.shape[1]:
        raise DataError(f"{path}: fewer rows ({X.shape[0]}) than covariates ({X.shape[1]})")
    return OrdinalDataset(X, y, J, names)


def save_dataset(data: OrdinalDataset, path: str | os.PathLike, extra: dict[str, np.ndarray] | None = None) -> None:
    """Write covariates then ``y`` (and any ``extra`` columns) at full precision."""
    extra = extra or {}
    buf = [",".join(list(data.names) + ["y"] + list(extra))]
    for i in range(data.n):
        cells = [fmt(v) for v in data.X[i]] + [str(int(data.y[i]))] + [fmt(col[i]) for col in extra.values()]
        buf.append(",".join(cells))
    atomic_write_text(path, "\n".join(buf) + "\n")


# ---------------------------------------------------------------------------
# chains


def _chain_meta_path(path: Path) -> Path:
    return path.with_suffix(".meta.json")


def write_chain(chain: ChainOutput, path: str | os.PathLike) -> None:
    """Chain CSV ``iter,beta_1..,sigma,gamma,delta_1..,loglik`` plus a metadata sidecar."""
    path = Path(path)
    names = chain.parameter_names()
    lines = [",".join(["iter"] + names + ["loglik"])]
    M = chain.matrix()
    for i in range(chain.n_draws):
        lines.append(",".join([str(i + 1)] + [fmt(v) for v in M[i]] + [fmt(chain.loglik[i])]))
    atomic_write_text(path, "\n".join(lines) + "\n")
    meta = {
        "model": chain.model,
        "p0": chain.p0,
        "c": chain.c,
        "J": chain.J,
        "names": chain.names,
        "accept_sigma_gamma": chain.accept_sigma_gamma,
        "accept_delta": chain.accept_delta,
        "seconds": chain.seconds,
        "inefficiency": chain.inefficiency,
    }
    atomic_write_text(_chain_meta_path(path), json.dumps(_jsonable(meta), indent=2) + "\n")


def read_chain(path: str | os.PathLike) -> ChainOutput:
    path = Path(path)
    meta_path = _chain_meta_path(path)
    if not meta_path.exists():
        raise DataError(f"{path}: missing metadata file {meta_path.name}")
    meta = json.loads(meta_path.read_text())
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = np.array([[float(c) for c in row] for row in reader])
    if data.size == 0:
        raise DataError(f"{path}: no draws")
    col = {h: i for i, h in enumerate(header)}
    beta_cols = [col[h] for h in header if h.startswith("beta_")]
    delta_cols = [col[h] for h in header if h.startswith("delta_")]

    def nan_or(v):
        return math.nan if v is None else v

    return ChainOutput(
        beta=data[:, beta_cols],
        sigma=data[:, col["sigma"]],
        gamma=data[:, col["gamma"]],
        delta=data[:, delta_cols].reshape(len(data), len(delta_cols)),
        loglik=data[:, col["loglik"]],
        accept_sigma_gamma=nan_or(meta["accept_sigma_gamma"]),
        accept_delta=nan_or(meta["accept_delta"]),
        seconds=meta["seconds"],
        p0=meta["p0"],
        model=meta["model"],
        c=meta["c"],
        J=meta["J"],
        names=meta["names"],
        inefficiency={k: nan_or(v) for k, v in meta.get("inefficiency", {}).items()},
    )


def _jsonable(obj):
    """Replace non-finite floats by None so the output is strict JSON."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


# ---------------------------------------------------------------------------
# manifests


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class RunManifest:
    command: str
    argv: list[str]
    config: dict
    seed: int | None
    version: str
    started: str = field(default_factory=_now)
    finished: str | None = None
    outputs: list[str] = field(default_factory=list)
    python: str = field(default_factory=lambda: sys.version.split()[0])
    numpy: str = field(default_factory=lambda: np.__version__)
    platform: str = field(default_factory=platform.platform)

    def finish(self, path: str | os.PathLike) -> None:
        self.finished = _now()
        atomic_write_text(path, json.dumps(_jsonable(asdict(self)), indent=2) + "\n")
