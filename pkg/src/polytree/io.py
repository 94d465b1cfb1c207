"""Model/JPDF JSON, dataset CSV, result JSON and DOT rendering."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .exceptions import InputError, ParseError
from .model import Dataset, Explicit, Polytree, VariableSpec

MAX_EXPLICIT_ENTRIES = 2**20


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def _parse_variables(raw, where):
    if not isinstance(raw, list) or not raw:
        raise ParseError(f"{where}: 'variables' must be a non-empty list")
    out = []
    for k, v in enumerate(raw):
        if not isinstance(v, dict) or "name" not in v or "cardinality" not in v:
            raise ParseError(f"{where}: variables[{k}] needs 'name' and 'cardinality'")
        try:
            out.append(VariableSpec(v["name"], v["cardinality"]))
        except InputError as exc:
            raise ParseError(f"{where}: variables[{k}]: {exc}") from exc
    return out


def model_from_dict(data: dict, where: str = "model") -> Polytree:
    if not isinstance(data, dict):
        raise ParseError(f"{where}: expected a JSON object")
    variables = _parse_variables(data.get("variables"), where)
    names = [v.name for v in variables]
    raw_parents = data.get("parents", {})
    raw_cpts = data.get("cpts")
    if not isinstance(raw_parents, dict) or not isinstance(raw_cpts, dict):
        raise ParseError(f"{where}: 'parents' and 'cpts' must be objects keyed by variable name")
    for key in list(raw_parents) + list(raw_cpts):
        if key not in names:
            raise ParseError(f"{where}: unknown variable {key!r}")
    parents, cpts = [], []
    for v in variables:
        ps = raw_parents.get(v.name, [])
        try:
            parents.append(tuple(names.index(p) for p in ps))
        except ValueError:
            raise ParseError(f"{where}: parents of {v.name!r} name an unknown variable: {ps}") from None
        if v.name not in raw_cpts:
            raise ParseError(f"{where}: missing CPT for variable {v.name!r}")
        table = raw_cpts[v.name]
        expected = int(np.prod([variables[p].cardinality for p in parents[-1]])) * v.cardinality
        if not isinstance(table, list) or len(table) != expected:
            got = len(table) if isinstance(table, list) else type(table).__name__
            raise ParseError(f"{where}: CPT for {v.name!r} needs {expected} entries, got {got}")
        try:
            cpts.append(np.array(table, dtype=float))
        except (TypeError, ValueError) as exc:
            raise ParseError(f"{where}: CPT for {v.name!r}: {exc}") from exc
    try:
        return Polytree(tuple(variables), tuple(parents), tuple(cpts))
    except InputError as exc:
        raise ParseError(f"{where}: {exc}") from exc


def model_to_dict(model: Polytree) -> dict:
    names = model.names
    return {
        "variables": [{"name": v.name, "cardinality": v.cardinality} for v in model.variables],
        "parents": {names[i]: [names[p] for p in ps] for i, ps in enumerate(model.parents)},
        "cpts": {names[i]: [float(x) for x in cpt.ravel()] for i, cpt in enumerate(model.cpts)},
    }


def read_model(path) -> Polytree:
    return model_from_dict(_load_json(path), str(path))


def write_model(model: Polytree, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2) + "\n")


def read_jpdf(path) -> Explicit:
    """Explicit joint table: ``{"variables": [...], "table": [...]}``, last variable fastest."""
    data = _load_json(path)
    if not isinstance(data, dict):
        raise ParseError(f"{path}: expected a JSON object")
    variables = _parse_variables(data.get("variables"), str(path))
    size = int(np.prod([v.cardinality for v in variables]))
    if size > MAX_EXPLICIT_ENTRIES:
        raise InputError(f"{path}: explicit table of {size} entries exceeds the {MAX_EXPLICIT_ENTRIES} cap")
    table = data.get("table")
    if not isinstance(table, list):
        raise ParseError(f"{path}: 'table' must be a list of probabilities")
    try:
        return Explicit(variables, np.array(table, dtype=float))
    except (InputError, TypeError, ValueError) as exc:
        raise ParseError(f"{path}: {exc}") from exc


def write_jpdf(src, path) -> None:
    data = {
        "variables": [{"name": v.name, "cardinality": v.cardinality} for v in src.variables],
        "table": [float(x) for x in src.joint_table().ravel()],
    }
    Path(path).write_text(json.dumps(data, indent=2) + "\n")


def read_csv(path, cardinalities=None) -> Dataset:
    """Read a header-plus-integers CSV.

    Cardinalities default to ``max value + 1`` per column (at least 2).
    """
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if not header:
                raise ParseError(f"{path}: missing header row")
            rows = []
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != len(header):
                    raise ParseError(f"{path}: line {lineno}: expected {len(header)} cells, got {len(row)}")
                try:
                    rows.append([int(x) for x in row])
                except ValueError:
                    raise ParseError(f"{path}: line {lineno}: non-integer cell in {row}") from None
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from exc
    if not rows:
        raise ParseError(f"{path}: no data rows")
    arr = np.array(rows, dtype=np.int64)
    if np.any(arr < 0):
        raise ParseError(f"{path}: negative values are not valid category codes")
    if cardinalities is None:
        cardinalities = [max(2, int(c) + 1) for c in arr.max(axis=0)]
    try:
        return Dataset.from_rows(list(zip(header, cardinalities)), arr)
    except InputError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def write_csv(names, rows, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        writer.writerows(np.asarray(rows).tolist())


def result_to_dict(names, weights, rs, model=None) -> dict:
    """Result document: weights, skeleton, per-edge states, basins, warnings."""
    edges = []
    for (u, v), s in sorted(rs.edge_states.items()):
        entry = {"u": u, "v": v, "state": "undetermined" if s is None else "directed"}
        if s is not None:
            entry["from"] = s[0]
        edges.append(entry)
    out = {
        "variables": list(names),
        "weights": [[i, j, w] for i, j, w in weights.entries] if weights is not None else [],
        "skeleton": [list(e) for e in sorted(rs.skeleton.edges)],
        "edges": edges,
        "basins": [[list(e) for e in basin] for basin in rs.basins],
        "warnings": list(rs.warnings),
    }
    if model is not None:
        out["model"] = model_to_dict(model)
    return out


def dumps_result(result: dict) -> str:
    return json.dumps(result, indent=2) + "\n"


def read_result(path) -> dict:
    data = _load_json(path)
    try:
        names = data["variables"]
        n = len(names)
        for e in data["edges"]:
            u, v, state = int(e["u"]), int(e["v"]), e["state"]
            if not (0 <= u < n and 0 <= v < n) or state not in ("directed", "undetermined"):
                raise ValueError(f"bad edge entry {e}")
            if state == "directed" and e.get("from") not in (u, v):
                raise ValueError(f"directed edge {e} lacks a valid 'from'")
        for basin in data["basins"]:
            for u, v in basin:
                int(u), int(v)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path}: malformed result file: {exc}") from exc
    return data


def result_directed(result: dict) -> set[tuple[int, int]]:
    out = set()
    for e in result["edges"]:
        if e["state"] == "directed":
            u, v = e["u"], e["v"]
            out.add((u, v) if e["from"] == u else (v, u))
    return out


def result_undetermined(result: dict) -> set[tuple[int, int]]:
    return {(min(e["u"], e["v"]), max(e["u"], e["v"])) for e in result["edges"] if e["state"] == "undetermined"}


def _q(name):
    return '"' + str(name).replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(result: dict) -> str:
    """Graphviz DOT for a result document; basins become clusters."""
    names = result["variables"]
    lines = ["digraph polytree {"]
    for name in names:
        lines.append(f"  {_q(name)};")
    directed = result_directed(result)
    in_basin = set()
    for k, basin in enumerate(result["basins"]):
        lines.append(f"  subgraph cluster_basin{k} {{")
        lines.append(f'    label="basin {k}";')
        for u, v in basin:
            lines.append(f"    {_q(names[u])} -> {_q(names[v])};")
            in_basin.add((u, v))
        lines.append("  }")
    for u, v in sorted(directed - in_basin):
        lines.append(f"  {_q(names[u])} -> {_q(names[v])};")
    for u, v in sorted(result_undetermined(result)):
        lines.append(f"  {_q(names[u])} -> {_q(names[v])} [dir=none, style=dashed];")
    lines.append("}")
    return "\n".join(lines) + "\n"
