"""JSON, CSV, text and DOT renderings of library values.

Output is bit-stable for fixed inputs: keys are sorted and rationals are
always written as ``p/q``.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from fractions import Fraction

from .amenability import BSReport, FolnerReport, Found, FreeProductFolner, NotFoundUpTo, fraction_text
from .chabauty import CertificateReport, MembershipConstraint, SubgroupHandle
from .cosets import CosetTable, Overflow
from .errors import UnsupportedFormat
from .permrep import PermRep, WindowAction
from .stallings import CoreGraph
from .words import Presentation, Word, format_word


def table_hash(t: CosetTable) -> str:
    text = f"{t.presentation}|{','.join(map(str, t.flat))}"
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def table_json(t: CosetTable) -> dict:
    return {"presentation": str(t.presentation), "index": t.index, "table": t.rows}


def core_json(c: CoreGraph) -> dict:
    idx = c.vertices if c.is_complete else "infinite"
    return {
        "presentation": str(Presentation(c.alphabet)),
        "index": idx,
        "vertices": c.vertices,
        "table": c.rows,
        "complete": c.is_complete,
    }


def handle_json(h: SubgroupHandle) -> dict:
    out = {
        "kind": h.kind,
        "index": h.index if h.index != math.inf else "infinite",
        "generators": [format_word(w) for w in h.generators()],
    }
    if h.table is not None:
        out["table"] = h.table.rows
    else:
        out["core"] = core_json(h.core)
    return out


def to_jsonable(value):
    """Plain JSON-compatible data for every value the CLI prints."""
    if isinstance(value, (str, int, bool)) or value is None:
        return value
    if isinstance(value, float):
        return "infinite" if value == math.inf else value
    if isinstance(value, Fraction):
        return fraction_text(value)
    if isinstance(value, Word):
        return format_word(value)
    if isinstance(value, Presentation):
        return str(value)
    if isinstance(value, CosetTable):
        return table_json(value)
    if isinstance(value, CoreGraph):
        return core_json(value)
    if isinstance(value, SubgroupHandle):
        return handle_json(value)
    if isinstance(value, Overflow):
        return {"result": "Overflow", "max_cosets": value.max_cosets}
    if isinstance(value, (MembershipConstraint, CertificateReport, FolnerReport, Found, NotFoundUpTo,
                          BSReport, FreeProductFolner, PermRep, WindowAction)):
        return to_jsonable(value.to_dict())
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, (set, frozenset)):
        return [to_jsonable(v) for v in sorted(value)]
    raise UnsupportedFormat(f"cannot serialise {type(value).__name__}")


def _dot_edges(lines, names, flat, width):
    for v in range(len(flat) // width):
        for i in range(width // 2):
            t = flat[v * width + 2 * i]
            if t >= 0:
                lines.append(f'  {v} -> {t} [label="{names[i]}"];')


def emit_dot(value, name: str = "G") -> str:
    """DOT text of a subgroup graph or of a materialised action window."""
    if isinstance(value, SubgroupHandle):
        value = value.table if value.table is not None else value.core
    if isinstance(value, CosetTable):
        names, flat, width, n = value.presentation.alphabet.names, value.flat, value.width, value.index
        marked = {0}
    elif isinstance(value, CoreGraph):
        names, flat, width, n = value.alphabet.names, value.flat, value.width, value.vertices
        marked = {0}
    elif isinstance(value, (PermRep, WindowAction)):
        names = value.presentation.alphabet.names
        n = value.size
        width = 2 * len(names)
        flat = [-1] * (n * width)
        for i, perm in enumerate(value.window_images()):
            for p, q in enumerate(perm):
                flat[p * width + 2 * i] = q
        marked = set(value.basepoints()) if isinstance(value, PermRep) else {0}
    else:
        raise UnsupportedFormat(f"no graph to draw for {type(value).__name__}")
    lines = [f"digraph {name} {{"]
    for v in range(n):
        shape = "doublecircle" if v in marked else "circle"
        lines.append(f"  {v} [shape={shape}];")
    _dot_edges(lines, names, flat, width)
    lines.append("}")
    return "\n".join(lines) + "\n"


def _csv(value) -> str:
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    if isinstance(value, (list, tuple)) and all(isinstance(t, CosetTable) for t in value):
        out.writerow(["index", "hash"])
        for t in value:
            out.writerow([t.index, table_hash(t)])
        return buf.getvalue()
    data = to_jsonable(value)
    if isinstance(data, list) and data and all(isinstance(r, dict) for r in data):
        keys = sorted({k for r in data for k in r})
        out.writerow(keys)
        for r in data:
            out.writerow([json.dumps(r.get(k), sort_keys=True) if isinstance(r.get(k), (list, dict)) else r.get(k)
                          for k in keys])
        return buf.getvalue()
    if isinstance(data, dict):
        out.writerow(["key", "value"])
        for k in sorted(data):
            v = data[k]
            out.writerow([k, json.dumps(v, sort_keys=True) if isinstance(v, (list, dict)) else v])
        return buf.getvalue()
    raise UnsupportedFormat(f"no CSV layout for {type(value).__name__}")


def _text(value) -> str:
    if isinstance(value, CertificateReport):
        lines = ["PASS" if value.passed else "FAIL"]
        lines.append(f"satisfies: {value.satisfies}")
        if value.collisions:
            lines.append(f"collisions: {value.collisions}")
        for k in value.offenders:
            gens = ", ".join(format_word(w) for w in k.generators())
            lines.append(f"offender: index {to_jsonable(k.index)} <{gens}>")
        return "\n".join(lines) + "\n"
    if isinstance(value, (list, tuple)) and all(isinstance(t, CosetTable) for t in value):
        return "".join(f"{t.index} {table_hash(t)}\n" for t in value)
    data = to_jsonable(value)
    if isinstance(data, dict):
        return "".join(f"{k}: {json.dumps(data[k], sort_keys=True)}\n" for k in sorted(data))
    return json.dumps(data, sort_keys=True) + "\n"


def emit_report(value, fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(to_jsonable(value), sort_keys=True, indent=2) + "\n"
    if fmt == "csv":
        return _csv(value)
    if fmt == "text":
        return _text(value)
    if fmt == "dot":
        return emit_dot(value)
    raise UnsupportedFormat(f"unknown output format {fmt!r}")
