#helpers.py
"""
Config loading and file I/O shared by the CLI commands.

- JSON config sections: problem, collocation, backend, quadrature, outputs.
- Unknown sections or keys are rejected before anything is computed.
- CSV in and out through pandas; floats written with 17 significant digits.
"""

import copy
import json
import logging
import os
import time

import numpy as np
import pandas as pd

from srcube.errors import ConfigError, SRCubeError
from srcube.geometry import BoundaryData
from srcube.pipeline import ProblemSpec
from states import backend_state, collocation_state, output_state, problem_state, quadrature_state

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"

CONFIG_SECTIONS = {
    "problem": problem_state,
    "collocation": collocation_state,
    "backend": backend_state,
    "quadrature": quadrature_state,
    "outputs": {"directory": None, "solution": output_state["solution"],
                "report": output_state["report"], "collocation": output_state["collocation"]},
}


def load_config(path) -> dict:
    """Validated config: every section present, defaults filled in from states.py."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")

    unknown = set(raw) - set(CONFIG_SECTIONS)
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    cfg = {}
    for name, defaults in CONFIG_SECTIONS.items():
        section = raw.get(name, {})
        if not isinstance(section, dict):
            raise ConfigError(f"config section {name!r} must be an object")
        bad = set(section) - set(defaults)
        if bad:
            raise ConfigError(f"unknown keys in {name!r}: {sorted(bad)}")
        merged = copy.deepcopy(defaults)
        merged.update(section)
        cfg[name] = merged
    # fail now rather than halfway through a solve
    spec_from_config(cfg)
    return cfg


def spec_from_config(cfg: dict, threads: int = 1) -> ProblemSpec:
    p, c, b, q = cfg["problem"], cfg["collocation"], cfg["backend"], cfg["quadrature"]
    try:
        data = BoundaryData.from_descriptor(p["data"])
        return ProblemSpec(data=data, n=int(c["n"]), placement=c["placement"], backend=b["name"],
                           alpha=float(b["alpha"]), degree=int(b["degree"]), n_cheb=int(b["n_cheb"]),
                           base_k=int(q["base_k"]), telles=bool(q["telles"]), rule=q["rule"],
                           estimate_error=bool(p["estimate_error"]), condition=b["condition"],
                           tsvd=bool(b["tsvd"]), threads=threads)
    except ConfigError:
        raise
    except (SRCubeError, TypeError, ValueError, KeyError, AttributeError) as exc:
        raise ConfigError(f"invalid config value: {exc}") from exc


def make_run_dir(base: str | None = None, directory: str | None = None) -> str:
    """Explicit directory, or a YYYY-MM-DD_HH_MM folder under the base directory."""
    if directory:
        save_dir = directory
    else:
        today = time.strftime("%Y-%m-%d_%H_%M", time.localtime())
        save_dir = f"{base or output_state['BASE_DIR']}/{today}"
    try:
        os.makedirs(save_dir, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {save_dir}: {exc}") from exc
    output_state['CURRENT_DIR'] = save_dir
    return save_dir


def read_points_csv(path) -> pd.DataFrame:
    """x,y,z columns in input order; missing or non-numeric coordinates become NaN."""
    try:
        df = pd.read_csv(path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise ConfigError(f"cannot read points file {path}: {exc}") from exc
    missing = {"x", "y", "z"} - set(df.columns)
    if missing:
        raise ConfigError(f"points file {path} lacks columns {sorted(missing)}")
    df = df[["x", "y", "z"]].apply(pd.to_numeric, errors="coerce")
    bad = int(df.isna().any(axis=1).sum())
    if bad:
        logger.warning("%d rows without valid coordinates in %s", bad, path)
    return df


def points_frame(points, values, status=None) -> pd.DataFrame:
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    df = pd.DataFrame({"x": pts[:, 0], "y": pts[:, 1], "z": pts[:, 2], "value": np.asarray(values, dtype=float)})
    if status is not None:
        df["status"] = list(status)
    return df


def write_csv(df: pd.DataFrame, path=None) -> str | None:
    """CSV with 17 significant digits; returns the text when no path is given."""
    if path is None:
        return df.to_csv(index=False, float_format=FLOAT_FORMAT)
    try:
        df.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc}") from exc
    logger.info("wrote %d rows to %s", len(df), path)
    return None


def write_json(obj, path) -> None:
    try:
        with open(path, "w") as fh:
            json.dump(obj, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc}") from exc
