"""File formats: path CSVs, experiment configs, summary tables and run manifests.

Floats are written with 17 significant digits so every float64 round-trips
exactly. All files are UTF-8 with LF line endings.
"""

import csv
import hashlib
import io
import json
import math
from pathlib import Path

import numpy as np

from . import __version__
from ._validation import DomainError
from .bessel import BesselPath, ModelParams
from .experiment import Cell, Estimator, ExperimentConfig, ExperimentSummary
from .fbm import FbmPath, FgnMethod

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

__all__ = [
    "ConfigError",
    "bundled_config_path",
    "CsvFormatError",
    "TABLE_COLUMNS",
    "canonical_config",
    "config_hash",
    "format_float",
    "load_config",
    "parse_config",
    "read_path_csv",
    "write_bessel_csv",
    "write_fbm_csv",
    "write_manifest",
    "write_plot_data",
    "write_table",
]

TABLE_COLUMNS = (
    "cell_id", "n", "T", "estimator", "mean", "variance", "cv",
    "invalid_count", "q_min", "q1", "median", "q3", "q_max",
)


class ConfigError(ValueError):
    """Config schema violation; ``field`` is a dotted path to the offending entry."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class CsvFormatError(ValueError):
    def __init__(self, line, message):
        super().__init__(f"line {line}: {message}")
        self.line = line


def format_float(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


def _write_text(path, text):
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def _rows_to_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def bessel_csv_text(path: BesselPath) -> str:
    rows = (
        (format_float(t), format_float(x), format_float(l), format_float(b))
        for t, x, l, b in zip(path.times, path.x, path.l, path.b)
    )
    return _rows_to_text(("t", "x", "l", "b"), rows)


def write_bessel_csv(path: BesselPath, dest):
    return _write_text(dest, bessel_csv_text(path))


def fbm_csv_text(path: FbmPath) -> str:
    rows = ((format_float(t), format_float(v)) for t, v in zip(path.times, path.values))
    return _rows_to_text(("t", "value"), rows)


def write_fbm_csv(path: FbmPath, dest):
    return _write_text(dest, fbm_csv_text(path))


def read_path_csv(source, column=None):
    """Read a path CSV; return ``(times, values)`` for ``column``.

    Without ``column`` the ``x`` column is used if present, otherwise ``value``.

    Raises:
        CsvFormatError: with the 1-based line number of the first bad line.
    """
    with open(source, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError(1, "empty file") from None
        header = [h.strip() for h in header]
        if "t" not in header:
            raise CsvFormatError(1, "header must contain a 't' column")
        if column is None:
            column = "x" if "x" in header else "value"
        if column not in header:
            raise CsvFormatError(1, f"no column {column!r} in header {header}")
        it, iv = header.index("t"), header.index(column)
        times, values = [], []
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != len(header):
                raise CsvFormatError(line, f"expected {len(header)} fields, got {len(row)}")
            try:
                t, v = float(row[it]), float(row[iv])
            except ValueError as exc:
                raise CsvFormatError(line, str(exc)) from None
            if not (math.isfinite(t) and math.isfinite(v)):
                raise CsvFormatError(line, "non-finite value")
            times.append(t)
            values.append(v)
    if len(values) < 2:
        raise CsvFormatError(reader.line_num, "need at least two data rows")
    times = np.array(times)
    dt = np.diff(times)
    if times[0] != 0.0 or np.any(dt <= 0) or not np.allclose(dt, dt[0], rtol=1e-9, atol=0.0):
        raise CsvFormatError(2, "times must form a uniform grid starting at 0")
    return times, np.array(values)


# -- configs -------------------------------------------------------------------

_MODEL_KEYS = {"x0", "a", "sigma", "hurst", "epsilon"}
_EXPERIMENT_KEYS = {"replications", "base_seed", "drift_resolution", "floor", "fgn_method", "workers"}
_CELL_KEYS = {"id", "estimator", "n", "T", "replications"}


def _check_keys(table, allowed, where):
    if not isinstance(table, dict):
        raise ConfigError(where, "expected a table")
    for key in table:
        if key not in allowed:
            raise ConfigError(f"{where}.{key}" if where else key, "unknown key")


def _typed(table, key, kind, where):
    value = table[key]
    ok = isinstance(value, kind) and not isinstance(value, bool)
    if not ok:
        raise ConfigError(f"{where}.{key}", f"expected {getattr(kind, '__name__', 'number')}, got {value!r}")
    return value


def parse_config(data: dict) -> ExperimentConfig:
    """Build an :class:`ExperimentConfig` from a parsed TOML/JSON mapping."""
    _check_keys(data, {"model", "experiment", "cells"}, "")
    model_tbl = data.get("model", {})
    exp_tbl = data.get("experiment", {})
    _check_keys(model_tbl, _MODEL_KEYS, "model")
    _check_keys(exp_tbl, _EXPERIMENT_KEYS, "experiment")

    model_kw = {k: float(_typed(model_tbl, k, (int, float), "model")) for k in model_tbl}
    try:
        model = ModelParams(**model_kw)
    except DomainError as exc:
        field = next((k for k in model_kw if k in str(exc)), "")
        raise ConfigError(f"model.{field}" if field else "model", str(exc)) from None

    exp_kw = {}
    for key in exp_tbl:
        if key == "fgn_method":
            exp_kw[key] = _typed(exp_tbl, key, str, "experiment")
            if exp_kw[key] not in {m.value for m in FgnMethod}:
                raise ConfigError("experiment.fgn_method", f"unknown method {exp_kw[key]!r}")
        elif key == "floor":
            exp_kw[key] = float(_typed(exp_tbl, key, (int, float), "experiment"))
        else:
            exp_kw[key] = _typed(exp_tbl, key, int, "experiment")
    resolution = exp_kw.get("drift_resolution", ExperimentConfig.drift_resolution)

    cells_raw = data.get("cells", [])
    if not isinstance(cells_raw, list):
        raise ConfigError("cells", "expected an array of tables")
    cells = []
    for i, raw in enumerate(cells_raw):
        where = f"cells[{i}]"
        _check_keys(raw, _CELL_KEYS, where)
        for required in ("estimator", "T"):
            if required not in raw:
                raise ConfigError(f"{where}.{required}", "missing")
        estimator = _typed(raw, "estimator", str, where)
        if estimator not in {e.value for e in Estimator}:
            raise ConfigError(f"{where}.estimator", f"unknown estimator {estimator!r}")
        horizon = float(_typed(raw, "T", (int, float), where))
        if "n" in raw:
            n = _typed(raw, "n", int, where)
        elif estimator == Estimator.DRIFT.value:
            n = round(horizon * resolution)
        else:
            raise ConfigError(f"{where}.n", "missing")
        if estimator == Estimator.DRIFT.value and n != round(horizon * resolution):
            raise ConfigError(f"{where}.n", f"drift cells need n = T * drift_resolution = {round(horizon * resolution)}")
        kw = {"n": n, "horizon": horizon, "estimator": estimator}
        if "replications" in raw:
            kw["replications"] = _typed(raw, "replications", int, where)
        if "id" in raw:
            kw["cell_id"] = _typed(raw, "id", str, where)
        try:
            cells.append(Cell(**kw))
        except DomainError as exc:
            raise ConfigError(where, str(exc)) from None
    try:
        return ExperimentConfig(model=model, cells=cells, **exp_kw)
    except DomainError as exc:
        raise ConfigError("experiment", str(exc)) from None


def bundled_config_path(name: str) -> Path:
    """Path of a reproduction config shipped with the package (e.g. ``"table1.toml"``)."""
    path = Path(__file__).parent / "configs" / name
    if not path.is_file():
        raise FileNotFoundError(f"no bundled config named {name!r}")
    return path


def load_config(path) -> ExperimentConfig:
    """Load a TOML (``.toml``) or JSON config file.

    A bare name that does not exist on disk is looked up among the bundled
    reproduction configs.
    """
    path = Path(path)
    if not path.exists() and path.parent == Path("."):
        path = bundled_config_path(path.name)
    raw = path.read_bytes()
    try:
        if path.suffix.lower() == ".json":
            data = json.loads(raw.decode("utf-8"))
        else:
            data = tomllib.loads(raw.decode("utf-8"))
    except (ValueError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError("<file>", f"cannot parse {path.name}: {exc}") from None
    return parse_config(data)


def canonical_config(config: ExperimentConfig) -> dict:
    """Fully resolved config as plain JSON-able data (defaults filled in)."""
    m = config.model
    return {
        "model": {"x0": m.x0, "a": m.a, "sigma": m.sigma, "hurst": m.hurst, "epsilon": m.epsilon},
        "experiment": {
            "replications": config.replications,
            "base_seed": config.base_seed,
            "drift_resolution": config.drift_resolution,
            "floor": config.floor,
            "fgn_method": config.fgn_method.value,
        },
        "cells": [
            {
                "id": config.cell_id(i),
                "estimator": c.estimator.value,
                "n": c.n,
                "T": c.horizon,
                "replications": config.cell_replications(i),
            }
            for i, c in enumerate(config.cells)
        ],
    }


def config_hash(config: ExperimentConfig) -> str:
    # workers is excluded: it never changes results
    blob = json.dumps(canonical_config(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


# -- outputs -------------------------------------------------------------------

def table_rows(summary: ExperimentSummary, config: ExperimentConfig):
    for i, cell in enumerate(summary.cells):
        spec = config.cells[i]
        if cell is None:
            err = summary.errors[config.cell_id(i)]
            yield [config.cell_id(i), spec.n, format_float(spec.horizon), spec.estimator.value,
                   *(["nan"] * 3), err.invalid_count, *(["nan"] * 5)]
            continue
        yield [
            cell.cell_id, cell.n, format_float(cell.horizon), cell.estimator.value,
            format_float(cell.mean), format_float(cell.variance), format_float(cell.cv),
            cell.invalid_count, *(format_float(q) for q in cell.boxplot),
        ]


def write_table(summary: ExperimentSummary, config: ExperimentConfig, dest):
    return _write_text(dest, _rows_to_text(TABLE_COLUMNS, table_rows(summary, config)))


def write_plot_data(summary: ExperimentSummary, dest):
    """Raw per-replication estimates (long format) for external box plots."""
    rows = []
    for cell in summary.cells:
        if cell is None:
            continue
        for r, (est, ok) in enumerate(zip(cell.estimates, cell.valid)):
            rows.append([cell.cell_id, r, format_float(est), int(ok)])
    return _write_text(dest, _rows_to_text(("cell_id", "replication", "estimate", "valid"), rows))


def write_manifest(config: ExperimentConfig, outputs, dest, timings=None):
    manifest = {
        "config_hash": config_hash(config),
        "tool_version": __version__,
        "config": canonical_config(config),
        "outputs": [Path(p).name for p in outputs],
    }
    if timings is not None:
        manifest["timings"] = timings
    return _write_text(dest, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
