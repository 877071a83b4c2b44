"""JSON serialization of state-channel systems.

Layout::

    {
      "states": ["0", "1"], "inputs": ["0", "1"], "outputs": ["0", "1"],
      "side_outputs": ["0", "1", "e"] or [],
      "p_s": [...],
      "y_given_xs": {"0": [[...], ...], "1": [[...], ...]},
      "side": [[...], ...] or null
    }

Matrices are row-major with one row per input symbol. ``y_given_xs`` may
also be a list ordered like ``states``. Rows within ``LOAD_TOL`` of
summing to one are renormalized on load.
"""

from __future__ import annotations

import json
import math
import os
import tempfile

import numpy as np

from .channels import Channel, StateChannelSystem
from .errors import DomainError

LOAD_TOL = 1e-9


def _labels(n: int) -> list[str]:
    return [str(i) for i in range(n)]


def system_to_dict(sys: StateChannelSystem, labels: dict | None = None) -> dict:
    labels = labels or {}
    states = labels.get("states") or _labels(sys.n_states)
    side = sys.side
    default_side = _labels(side.n_out) if side is not None else []
    return {
        "states": list(states),
        "inputs": list(labels.get("inputs") or _labels(sys.n_inputs)),
        "outputs": list(labels.get("outputs") or _labels(sys.n_outputs)),
        "side_outputs": list(labels.get("side_outputs") or default_side),
        "p_s": np.asarray(sys.p_s).tolist(),
        "y_given_xs": {s: ch.rows.tolist() for s, ch in zip(states, sys.y_given_xs)},
        "side": side.rows.tolist() if side is not None else None,
    }


def dumps(sys: StateChannelSystem) -> str:
    """One top-level key per line, matrices inline.

    json writes floats with repr, so loading reproduces every value exactly.
    """
    doc = system_to_dict(sys)
    lines = []
    for key, val in doc.items():
        if key == "y_given_xs":
            inner = ",\n".join(f"    {json.dumps(s)}: {json.dumps(m)}" for s, m in val.items())
            lines.append(f'  "{key}": {{\n{inner}\n  }}')
        else:
            lines.append(f"  {json.dumps(key)}: {json.dumps(val)}")
    return "{\n" + ",\n".join(lines) + "\n}\n"


def _matrix(raw, name: str, shape: tuple[int, int] | None = None) -> np.ndarray:
    try:
        m = np.array(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise DomainError(f"{name} is not a numeric matrix") from exc
    if m.ndim != 2:
        raise DomainError(f"{name} must be a matrix")
    if shape is not None and m.shape != shape:
        raise DomainError(f"{name} has shape {m.shape}, expected {shape}")
    if not np.all(np.isfinite(m)) or np.any(m < 0):
        raise DomainError(f"{name} has negative or non-finite entries")
    sums = m.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > LOAD_TOL):
        raise DomainError(f"rows of {name} do not sum to 1: {sums.tolist()}")
    if np.any(sums != 1.0):
        m = m / sums[:, None]
    return m


def _label_list(doc: dict, key: str) -> list:
    val = doc.get(key)
    if not isinstance(val, list):
        raise DomainError(f"'{key}' must be a list")
    return val


def system_from_dict(doc) -> StateChannelSystem:
    if not isinstance(doc, dict):
        raise DomainError("system file must hold a JSON object")
    missing = {"states", "inputs", "outputs", "p_s", "y_given_xs"} - doc.keys()
    if missing:
        raise DomainError(f"system file lacks keys {sorted(missing)}")
    states = _label_list(doc, "states")
    inputs = _label_list(doc, "inputs")
    outputs = _label_list(doc, "outputs")
    shape = (len(inputs), len(outputs))

    raw = doc["y_given_xs"]
    if isinstance(raw, dict):
        keys = [str(s) for s in states]
        if sorted(raw) != sorted(keys):
            raise DomainError("y_given_xs keys must match the state labels")
        raw = [raw[k] for k in keys]
    if not isinstance(raw, list) or len(raw) != len(states):
        raise DomainError("y_given_xs needs one matrix per state")
    chans = [Channel(_matrix(m, f"y_given_xs[{s}]", shape)) for s, m in zip(states, raw)]

    if not isinstance(doc["p_s"], list) or len(doc["p_s"]) != len(states):
        raise DomainError("p_s needs one entry per state")
    p_s = _matrix([doc["p_s"]], "p_s")[0]

    side = doc.get("side")
    if side is not None:
        side_outputs = doc.get("side_outputs")
        n_side = len(side_outputs) if isinstance(side_outputs, list) and side_outputs else None
        m = _matrix(side, "side")
        if n_side is not None and m.shape[1] != n_side:
            raise DomainError("side has a column count different from side_outputs")
        side = Channel(m)
    return StateChannelSystem(tuple(chans), p_s, side)


def loads(text: str) -> StateChannelSystem:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DomainError(f"invalid JSON: {exc}") from exc
    return system_from_dict(doc)


def load(path) -> StateChannelSystem:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def load_channel(path) -> Channel:
    """A channel from a file holding a bare matrix or an object with ``side``."""
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DomainError(f"invalid JSON: {exc}") from exc
    if isinstance(doc, dict):
        doc = doc.get("side")
        if doc is None:
            raise DomainError("file has no 'side' matrix")
    return Channel(_matrix(doc, "side"))


def write_text_atomic(path, text: str) -> None:
    """Write ``text`` (LF line endings) so that ``path`` is either untouched or complete."""
    target = os.fspath(path)
    folder = os.path.dirname(os.path.abspath(target))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-", suffix=os.path.basename(target))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.chmod(tmp, 0o644)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def fmt(x: float) -> str:
    """12 significant digits; infinities as ``inf``."""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.12g}"
