"""Study configuration files, result CSVs, run manifests and plot data."""

from __future__ import annotations

import csv
import json
import warnings
from collections import defaultdict
from dataclasses import dataclass, fields
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

import yaml

from . import __version__
from .estimators import EstimateSeries
from .simulation import PerformanceRow, PerformanceTable, StudyConfig

RESULTS_HEADER = (
    "family,x_star,gamma_true,p_censor,estimator,k,median_bias,mse,n_valid,n_missing"
)
SERIES_HEADER = "estimator,k,estimate,raw,phat,degenerate"
RUNTIME_WARNING_SECONDS = 30 * 60
CONFIG_KEYS = tuple(f.name for f in fields(StudyConfig))


class ConfigError(ValueError):
    pass


class RuntimeEstimateWarning(UserWarning):
    pass


@dataclass(frozen=True)
class RunManifest:
    config: StudyConfig
    tool_version: str
    started_at: str
    master_seed: int

    @classmethod
    def create(cls, config: StudyConfig) -> "RunManifest":
        now = datetime.now(timezone.utc).isoformat(timespec="seconds")
        return cls(config, __version__, now, config.master_seed)

    def to_dict(self) -> dict:
        return {
            "tool_version": self.tool_version,
            "started_at": self.started_at,
            "master_seed": self.master_seed,
            "config": self.config.to_dict(),
        }


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _as_list(key, value, kind):
    items = value if isinstance(value, list) else [value]
    out = []
    for i, item in enumerate(items):
        if kind is float and _is_number(item):
            out.append(float(item))
        elif kind is int and isinstance(item, int) and not isinstance(item, bool):
            out.append(item)
        elif kind is str and isinstance(item, str):
            out.append(item)
        else:
            raise ConfigError(f"{key}[{i}]: expected {kind.__name__}, got {item!r}")
    return out


def config_from_mapping(raw: dict, source: str = "<config>") -> StudyConfig:
    """Validate a key/value mapping into a :class:`StudyConfig`."""
    if not isinstance(raw, dict):
        raise ConfigError(f"{source}: top level must be a key/value mapping")
    unknown = sorted(set(raw) - set(CONFIG_KEYS))
    if unknown:
        raise ConfigError(f"{source}: unknown key(s) {', '.join(unknown)}")
    kw = {}
    for key, value in raw.items():
        if key in ("x_stars", "p_levels"):
            kw[key] = tuple(_as_list(key, value, float))
        elif key in ("family", "kinds"):
            kw[key] = tuple(_as_list(key, value, str))
        elif key == "k_grid":
            kw[key] = None if value is None else tuple(_as_list(key, value, int))
        elif key in ("n", "R", "master_seed"):
            if not isinstance(value, int) or isinstance(value, bool):
                raise ConfigError(f"{key}: expected integer, got {value!r}")
            kw[key] = value
        elif key in ("beta0", "beta1", "h"):
            if not _is_number(value):
                raise ConfigError(f"{key}: expected number, got {value!r}")
            kw[key] = float(value)
        elif key == "ppd_fix_tau":
            if value is not None and not _is_number(value):
                raise ConfigError(f"{key}: expected number or null, got {value!r}")
            kw[key] = None if value is None else float(value)
        elif key == "ww_kl_spacing_form":
            if not isinstance(value, bool):
                raise ConfigError(f"{key}: expected true/false, got {value!r}")
            kw[key] = value
        elif key == "censoring_family":
            if value is not None and not isinstance(value, str):
                raise ConfigError(f"{key}: expected family name or null, got {value!r}")
            kw[key] = value
    try:
        config = StudyConfig(**kw)
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    seconds = config.estimated_seconds()
    if seconds > RUNTIME_WARNING_SECONDS:
        warnings.warn(
            f"{source}: estimated single-core runtime about {seconds / 3600:.1f} h",
            RuntimeEstimateWarning,
            stacklevel=2,
        )
    return config


def parse_config(path) -> StudyConfig:
    """Read a YAML study config, or the ``config`` block of a run manifest."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"{path}: config file not found")
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: malformed config: {exc}") from None
    if raw is None:
        raw = {}
    if isinstance(raw, dict) and "config" in raw and "tool_version" in raw:
        raw = raw["config"]
    return config_from_mapping(raw, str(path))


def write_config(config: StudyConfig, path) -> Path:
    path = Path(path)
    path.write_text(yaml.safe_dump(config.to_dict(), sort_keys=False))
    return path


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _row_fields(row: PerformanceRow) -> list[str]:
    return [
        row.family,
        _fmt(row.x_star),
        _fmt(row.gamma_true),
        _fmt(row.p_censor),
        row.estimator,
        str(row.k),
        _fmt(row.median_bias),
        _fmt(row.mse),
        str(row.n_valid),
        str(row.n_missing),
    ]


def write_results(table: PerformanceTable, manifest: Optional[RunManifest], directory) -> list[Path]:
    """Write ``results.csv`` (and ``manifest.json`` when a manifest is given)."""
    directory = Path(directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
        results = directory / "results.csv"
        with open(results, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(RESULTS_HEADER.split(","))
            for row in table.sorted_rows():
                writer.writerow(_row_fields(row))
        paths = [results]
        if manifest is not None:
            mpath = directory / "manifest.json"
            mpath.write_text(json.dumps(manifest.to_dict(), indent=2) + "\n")
            paths.append(mpath)
    except OSError as exc:
        raise OSError(f"{exc.filename or directory}: cannot write results: {exc.strerror}") from exc
    return paths


def read_results(path) -> list[PerformanceRow]:
    with open(path, newline="") as fh:
        header = fh.readline().rstrip("\n")
        if header != RESULTS_HEADER:
            raise ValueError(f"{path}: unexpected header {header!r}")
        rows = []
        for rec in csv.reader(fh):
            rows.append(
                PerformanceRow(
                    family=rec[0],
                    x_star=float(rec[1]),
                    gamma_true=float(rec[2]),
                    p_censor=float(rec[3]),
                    estimator=rec[4],
                    k=int(rec[5]),
                    median_bias=float(rec[6]),
                    mse=float(rec[7]),
                    n_valid=int(rec[8]),
                    n_missing=int(rec[9]),
                )
            )
    return rows


def _p_label(p: float) -> str:
    return f"{p:g}".replace(".", "p")


def emit_plot_data(table: PerformanceTable, directory, kinds=None, x_stars=None) -> list[Path]:
    """Long-format bias and MSE curves, two files per (family, censoring level).

    Columns: ``panel,x_star,gamma_true,estimator,k,value``. ``panel`` numbers
    the covariate points in ascending order (one figure column each).
    Estimators with no rows for a panel are listed in ``plot_data.json``.
    """
    if not table.rows:
        raise ValueError("cannot emit plot data for an empty table")
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    groups = defaultdict(list)
    for row in table.sorted_rows():
        groups[(row.family, row.p_censor)].append(row)
    all_x = sorted(set(x_stars or ()) | {r.x_star for r in table.rows})
    panel = {x: i + 1 for i, x in enumerate(all_x)}
    expected = [k.value if hasattr(k, "value") else str(k) for k in kinds] if kinds else None
    if expected is None:
        expected = sorted({r.estimator for r in table.rows})

    paths, omitted = [], []
    for (family, p_censor), rows in sorted(groups.items()):
        present = {(r.x_star, r.estimator) for r in rows}
        for x in all_x:
            for est in expected:
                if (x, est) not in present:
                    omitted.append(
                        {"family": family, "p_censor": p_censor, "x_star": x, "estimator": est}
                    )
        for measure in ("bias", "mse"):
            path = directory / f"{family}_censor{_p_label(p_censor)}_{measure}.csv"
            with open(path, "w", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(["panel", "x_star", "gamma_true", "estimator", "k", "value"])
                for r in sorted(rows, key=lambda r: (r.x_star, r.estimator, r.k)):
                    value = r.median_bias if measure == "bias" else r.mse
                    writer.writerow(
                        [panel[r.x_star], _fmt(r.x_star), _fmt(r.gamma_true), r.estimator, r.k, _fmt(value)]
                    )
            paths.append(path)
    sidecar = directory / "plot_data.json"
    sidecar.write_text(
        json.dumps(
            {"files": [p.name for p in paths], "omitted_series": omitted, "panels": panel_list(panel)},
            indent=2,
        )
        + "\n"
    )
    return paths


def panel_list(panel: dict) -> list[dict]:
    return [{"panel": i, "x_star": x} for x, i in sorted(panel.items(), key=lambda kv: kv[1])]


def write_series(series: list[EstimateSeries], fh) -> None:
    """Estimate series as CSV; missing values are empty fields."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(SERIES_HEADER.split(","))
    for sr in series:
        for k, est, raw, ph, degen in zip(sr.k_values, sr.estimates, sr.raw, sr.phat, sr.degenerate):
            writer.writerow([sr.kind.value, k, _fmt(est), _fmt(raw), _fmt(ph), _fmt(bool(degen))])
