"""
Result files: schema-tagged CSV tables, the JSON run manifest and a
Markdown summary rendered with Jinja2.
"""

import json
import logging
import os
import platform
from importlib import metadata
from typing import Any, Dict, Iterable, List, Mapping

import numpy as np
import pandas as pd
from jinja2 import Environment

from .checks import CheckResult
from .schema import SCHEMA_VERSION, RunManifest

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
TRACKED_PACKAGES = ("hypcircle", "numpy", "scipy", "pandas", "pydantic", "joblib", "jinja2", "pyyaml", "tqdm")

SUMMARY_TEMPLATE = """\
# {{ manifest.config.name or manifest.config.subcommand }}

- subcommand: `{{ manifest.config.subcommand }}`
- group: `{{ manifest.config.group }}`
- observable: `{{ observable }}`
- seed: {{ manifest.config.seed }}, tol: {{ manifest.config.tol }}
- wall clock: {{ "%.2f"|format(manifest.wall_clock_s) }} s
- status: {{ "PASSED" if manifest.passed else "FAILED" }}{% if manifest.partial %} (partial results){% endif %}

## Checks

| check | result | value | threshold | details |
|---|---|---|---|---|
{% for c in manifest.checks %}
| {{ c.name }} | {{ "pass" if c.passed else "FAIL" }} | {{ fmt(c.value) }} | {{ fmt(c.threshold) }} | {{ c.details }} |
{% endfor %}
{% if manifest.errors %}

## Errors

{% for e in manifest.errors %}
- {{ e }}
{% endfor %}
{% endif %}
{% for name, table in tables.items() %}

## {{ name }}

| {{ table.columns|join(" | ") }} |
|{% for _ in table.columns %}---|{% endfor %}

{% for row in table.rows %}
| {{ row|map("string")|join(" | ") }} |
{% endfor %}
{% endfor %}
"""


def _fmt(x: Any) -> str:
    if x is None:
        return "-"
    return f"{x:.6g}" if isinstance(x, float) else str(x)


def frame(rows: Iterable[Mapping[str, Any]]) -> pd.DataFrame:
    """DataFrame with complex columns split into `<name>_re` / `<name>_im`."""
    df = pd.DataFrame(list(rows))
    for col in list(df.columns):
        if df[col].dtype == object and df[col].map(lambda v: isinstance(v, complex)).any():
            values = df[col].astype(complex)
        elif np.iscomplexobj(df[col].to_numpy()):
            values = df[col].to_numpy().astype(complex)
        else:
            continue
        pos = df.columns.get_loc(col)
        df = df.drop(columns=col)
        df.insert(pos, f"{col}_im", np.imag(values))
        df.insert(pos, f"{col}_re", np.real(values))
    return df


def write_table(df: pd.DataFrame, path: str) -> str:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(f"{SCHEMA_VERSION}\n")
        df.to_csv(f, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.debug("wrote %d rows to %s", len(df), path)
    return path


def read_table(path: str) -> pd.DataFrame:
    with open(path, "r", encoding="utf-8") as f:
        tag = f.readline().strip()
    if tag != SCHEMA_VERSION:
        raise ValueError(f"{path}: expected schema tag '{SCHEMA_VERSION}', found '{tag}'")
    return pd.read_csv(path, skiprows=1)


def package_versions() -> Dict[str, str]:
    versions = {"python": platform.python_version()}
    for name in TRACKED_PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "unknown"
    return versions


def check_records(results: Iterable[CheckResult]) -> List[Dict[str, Any]]:
    return [r.as_dict() for r in results]


def write_manifest(manifest: RunManifest, path: str) -> str:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(manifest.model_dump(mode="json"), f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def render_summary(manifest: RunManifest, tables: Mapping[str, pd.DataFrame], max_rows: int = 50) -> str:
    env = Environment(trim_blocks=True, lstrip_blocks=True)
    template = env.from_string(SUMMARY_TEMPLATE)
    view = {
        name: {"columns": [str(c) for c in df.columns],
               "rows": [[_fmt(v) for v in row] for row in df.head(max_rows).itertuples(index=False)]}
        for name, df in tables.items()
    }
    return template.render(manifest=manifest, tables=view, observable=manifest.config.observable.label(), fmt=_fmt)


def write_summary(manifest: RunManifest, tables: Mapping[str, pd.DataFrame], path: str) -> str:
    with open(path, "w", encoding="utf-8") as f:
        f.write(render_summary(manifest, tables))
    return path
