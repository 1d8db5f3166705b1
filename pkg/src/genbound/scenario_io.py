"""JSON scenario files and bound-report serialization.

The scenario schema is documented in ``docs/scenario_schema.md``. Symbols
are written as JSON strings or numbers; a kernel row is keyed by the
comma-joined training tuple, optionally followed by ``|r`` for the
auxiliary symbol.
"""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .bounds_standard import REPORT_SCHEMA_VERSION, BoundReport
from .prob import DiscreteScenario

SCENARIO_SCHEMA_VERSION = 1
_REQUIRED = ("sample_alphabet", "hypothesis_alphabet", "n", "p_z", "kernel", "loss")


class ScenarioParseError(ValueError):
    """A scenario file is malformed; the message names the offending field."""


def _fail(field: str, msg: str):
    raise ScenarioParseError(f"field '{field}': {msg}")


def _symbols(doc: dict, key: str) -> list[str]:
    alphabet = doc[key]
    if not isinstance(alphabet, list) or not alphabet:
        _fail(key, "must be a nonempty list")
    out = [str(s) for s in alphabet]
    for s in out:
        if "," in s or "|" in s:
            _fail(key, f"symbol {s!r} may not contain ',' or '|'")
    if len(set(out)) != len(out):
        _fail(key, "symbols must be unique")
    return out


def _vector(value: Any, field: str, size: int | None = None) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        _fail(field, "must be a list of numbers")
    if arr.ndim != 1 or (size is not None and arr.size != size):
        _fail(field, f"must be a list of {size} numbers" if size else "must be a flat list")
    return arr


def _matrix(value: Any, field: str, shape: tuple[int, int]) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        _fail(field, "must be a matrix of numbers")
    if arr.shape != shape:
        _fail(field, f"must have shape {list(shape)}, got {list(arr.shape)}")
    return arr


def _metric(value: Any, field: str, size: int):
    if value is None or value == "discrete":
        return "discrete"
    return _matrix(value, field, (size, size))


def scenario_from_dict(doc: dict) -> DiscreteScenario:
    """Build a :class:`DiscreteScenario` from a parsed scenario document.

    Raises :class:`ScenarioParseError` for structural problems and lets
    :class:`~genbound.prob.InvariantError` through for semantic ones.
    """
    if not isinstance(doc, dict):
        raise ScenarioParseError("top level must be a JSON object")
    version = doc.get("schema_version", SCENARIO_SCHEMA_VERSION)
    if version != SCENARIO_SCHEMA_VERSION:
        _fail("schema_version", f"unsupported version {version!r}")
    for key in _REQUIRED:
        if key not in doc:
            _fail(key, "is required")
    zs = _symbols(doc, "sample_alphabet")
    ws = _symbols(doc, "hypothesis_alphabet")
    n = doc["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        _fail("n", "must be a positive integer")
    p_z = _vector(doc["p_z"], "p_z", len(zs))
    aux = doc.get("aux")
    if aux is None:
        rs, p_r = ["-"], np.ones(1)
    else:
        if not isinstance(aux, dict) or "alphabet" not in aux or "probs" not in aux:
            _fail("aux", "must be an object with 'alphabet' and 'probs'")
        rs = _symbols(aux, "alphabet")
        p_r = _vector(aux["probs"], "aux.probs", len(rs))
    kernel_doc = doc["kernel"]
    if not isinstance(kernel_doc, dict):
        _fail("kernel", "must be an object keyed by training tuples")
    if len(zs) ** n * len(rs) > 10 ** 6:
        _fail("kernel", "state space exceeds the enumeration guard of 10^6 rows")
    zi = {s: i for i, s in enumerate(zs)}
    ri = {s: i for i, s in enumerate(rs)}
    kernel = np.full((len(zs),) * n + (len(rs), len(ws)), np.nan)
    for key, row in kernel_doc.items():
        sample_part, _, r_part = key.partition("|")
        symbols = [t.strip() for t in sample_part.split(",")]
        if len(symbols) != n or any(t not in zi for t in symbols):
            _fail(f"kernel[{key!r}]", f"key must list {n} symbols from sample_alphabet")
        if aux is None and r_part:
            _fail(f"kernel[{key!r}]", "'|r' suffix given but no aux alphabet declared")
        idx = tuple(zi[t] for t in symbols)
        if r_part and r_part.strip() not in ri:
            _fail(f"kernel[{key!r}]", f"unknown auxiliary symbol {r_part!r}")
        r_targets = [ri[r_part.strip()]] if r_part else list(range(len(rs)))
        vec = _vector(row, f"kernel[{key!r}]", len(ws))
        for r in r_targets:
            kernel[idx + (r,)] = vec
    missing = np.argwhere(np.isnan(kernel[..., 0]))
    if missing.size:
        first = missing[0]
        label = ",".join(zs[i] for i in first[:n]) + ("" if aux is None else f"|{rs[first[n]]}")
        _fail("kernel", f"missing row for {label!r} ({len(missing)} missing in total)")
    loss = _matrix(doc["loss"], "loss", (len(ws), len(zs)))
    lip = doc.get("lipschitz")
    if lip is not None and not isinstance(lip, (int, float)):
        _fail("lipschitz", "must be a number or null")
    zlip = doc.get("sample_lipschitz")
    if zlip is not None and not isinstance(zlip, (int, float)):
        _fail("sample_lipschitz", "must be a number or null")
    return DiscreteScenario(
        samples=zs, n=n, p_z=p_z, hypotheses=ws, kernel=kernel, loss=loss,
        metric=_metric(doc.get("metric"), "metric", len(ws)), lipschitz=lip,
        aux=rs, p_r=p_r,
        sample_metric=_metric(doc.get("sample_metric"), "sample_metric", len(zs)),
        sample_lipschitz=zlip, name=str(doc.get("name", "scenario")),
    )


def load_scenario(path: str | Path) -> DiscreteScenario:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return scenario_from_dict(doc)


def scenario_to_dict(sc: DiscreteScenario) -> dict:
    zs = [str(s) for s in sc.samples]
    ws = [str(w) for w in sc.hypotheses]
    kernel = {}
    for idx in np.ndindex(*sc.kernel.shape[:-1]):
        key = ",".join(zs[i] for i in idx[:-1])
        if sc.has_aux:
            key += f"|{sc.aux[idx[-1]]}"
        kernel[key] = sc.kernel[idx].tolist()
    doc = {
        "schema_version": SCENARIO_SCHEMA_VERSION,
        "name": sc.name,
        "sample_alphabet": zs,
        "hypothesis_alphabet": ws,
        "n": sc.n,
        "p_z": sc.p_z.tolist(),
        "kernel": kernel,
        "loss": sc.loss.tolist(),
        "metric": "discrete" if sc.metric.is_discrete else sc.metric.dist.tolist(),
        "lipschitz": sc.lipschitz,
        "sample_metric": "discrete" if sc.sample_metric.is_discrete else sc.sample_metric.dist.tolist(),
        "sample_lipschitz": sc.sample_lipschitz,
    }
    if sc.has_aux:
        doc["aux"] = {"alphabet": [str(r) for r in sc.aux], "probs": sc.p_r.tolist()}
    return doc


# -- reports -------------------------------------------------------------------


def _number(x: float):
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def json_safe(obj):
    if isinstance(obj, dict):
        return {str(k): json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_safe(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _number(obj)
    return obj


def report_to_dict(report: BoundReport) -> dict:
    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "scenario": report.scenario,
        "gen": _number(report.gen),
        "bounds": {k: _number(v) for k, v in report.bounds.items()},
        "metadata": json_safe(report.metadata),
    }


def report_to_json(report: BoundReport) -> str:
    return json.dumps(report_to_dict(report), indent=2) + "\n"


def report_from_dict(doc: dict) -> BoundReport:
    # float() also parses the "inf" strings written by _number
    return BoundReport(
        scenario=doc["scenario"], gen=float(doc["gen"]),
        bounds={k: float(v) for k, v in doc["bounds"].items()}, metadata=doc.get("metadata", {}),
    )


def report_to_csv(report: BoundReport) -> str:
    """``bound,value`` rows; the first row holds the exact generalization error."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["bound", "value"])
    writer.writerow(["gen_exact", repr(float(report.gen))])
    for name, value in report.bounds.items():
        writer.writerow([name, repr(float(value))])
    return buf.getvalue()
