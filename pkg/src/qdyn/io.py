"""JSON matrix documents.

Every document is an object ``{"kind": ..., "dims": [...], "data": ...}``.
Complex entries are ``[re, im]`` pairs and matrices are row-major nested
lists. Floats are written with ``repr`` precision, so a written document
parses back to bit-identical arrays.

Kinds
-----
``matrix``       one matrix; ``dims = [rows, cols]``
``state``        density matrix; ``dims`` are subsystem dimensions
``channel``      list of Kraus matrices; ``dims = [dim_out, dim_in]``
``measurement``  list of measurement operators; ``dims = [d]``
``chain-spec``   chain description object; see :func:`parse_chain_spec`
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from qdyn.chain import (
    Measurement,
    MeasurementChain,
    amplitude_damping_initial,
    amplitude_damping_measurement,
    stern_gerlach_chain,
)
from qdyn.channel import KrausChannel
from qdyn.errors import QdynError
from qdyn.states import check_density

KINDS = ("matrix", "state", "channel", "measurement", "chain-spec")


class DocumentError(QdynError):
    """Malformed or invalid matrix document."""


def encode_complex(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def encode_matrix(m) -> list:
    a = np.asarray(m, dtype=np.complex128)
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def _decode_number(x: Any, where: str) -> complex:
    if isinstance(x, bool):
        raise DocumentError(f"{where}: expected a number, got a boolean")
    if isinstance(x, (int, float)):
        val = complex(x)
    elif isinstance(x, list) and len(x) == 2 and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in x):
        val = complex(x[0], x[1])
    else:
        raise DocumentError(f"{where}: expected [re, im], got {json.dumps(x)[:40]}")
    if not (math.isfinite(val.real) and math.isfinite(val.imag)):
        raise DocumentError(f"{where}: non-finite entry")
    return val


def decode_matrix(data: Any, where: str = "data") -> np.ndarray:
    if not isinstance(data, list) or not data or not all(isinstance(r, list) for r in data):
        raise DocumentError(f"{where}: expected a non-empty list of rows")
    ncols = len(data[0])
    out = np.empty((len(data), ncols), dtype=np.complex128)
    for r, row in enumerate(data):
        if len(row) != ncols:
            raise DocumentError(f"{where}[{r}]: row has {len(row)} entries, expected {ncols} (row {r})")
        for c, x in enumerate(row):
            out[r, c] = _decode_number(x, f"{where}[{r}][{c}] (row {r}, col {c})")
    return out


def document(kind: str, dims, data) -> dict:
    if kind not in KINDS:
        raise ValueError(f"unknown document kind {kind!r}")
    return {"kind": kind, "dims": [int(d) for d in dims], "data": data}


def matrix_document(m) -> dict:
    a = np.asarray(m)
    return document("matrix", a.shape, encode_matrix(a))


def state_document(rho, dims=None) -> dict:
    a = np.asarray(rho)
    return document("state", dims or [a.shape[0]], encode_matrix(a))


def channel_document(ch: KrausChannel) -> dict:
    return document("channel", [ch.dim_out, ch.dim_in], [encode_matrix(k) for k in ch.kraus])


def measurement_document(m: Measurement) -> dict:
    return document("measurement", [m.dim], [encode_matrix(k) for k in m.ops])


def dumps(doc: dict) -> str:
    return json.dumps(doc, allow_nan=False)


def write_document(doc: dict, path) -> None:
    Path(path).write_text(dumps(doc) + "\n")


def loads(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise DocumentError("document must be a JSON object")
    kind = doc.get("kind")
    if kind not in KINDS:
        raise DocumentError(f"unknown or missing kind {kind!r}; expected one of {', '.join(KINDS)}")
    dims = doc.get("dims", [])
    if not isinstance(dims, list) or not all(isinstance(d, int) and not isinstance(d, bool) and d > 0 for d in dims):
        raise DocumentError("dims must be a list of positive integers")
    if "data" not in doc:
        raise DocumentError("document has no data field")
    return doc


def read_document(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DocumentError(f"cannot read {path}: {exc.strerror}") from None
    return loads(text)


def _expect(doc: dict, *kinds: str) -> None:
    if doc["kind"] not in kinds:
        raise DocumentError(f"expected a {' or '.join(kinds)} document, got {doc['kind']!r}")


def parse_matrix(doc: dict) -> np.ndarray:
    _expect(doc, "matrix", "state")
    m = decode_matrix(doc["data"])
    dims = doc["dims"]
    if doc["kind"] == "matrix" and dims and list(m.shape) != dims:
        raise DocumentError(f"dims {dims} do not match data shape {list(m.shape)}")
    return m


def parse_state(doc: dict) -> np.ndarray:
    _expect(doc, "state", "matrix")
    m = decode_matrix(doc["data"])
    if doc["kind"] == "state" and doc["dims"] and int(np.prod(doc["dims"])) != m.shape[0]:
        raise DocumentError(f"subsystem dims {doc['dims']} do not match state size {m.shape[0]}")
    try:
        return check_density(m)
    except QdynError as exc:
        raise DocumentError(f"not a valid state: {exc}") from None


def _matrix_list(doc: dict) -> list[np.ndarray]:
    data = doc["data"]
    if not isinstance(data, list) or not data:
        raise DocumentError("data must be a non-empty list of matrices")
    return [decode_matrix(m, f"data[{k}]") for k, m in enumerate(data)]


def parse_channel(doc: dict) -> KrausChannel:
    _expect(doc, "channel")
    ops = _matrix_list(doc)
    dims = doc["dims"]
    if dims and len(dims) == 2 and list(ops[0].shape) != dims:
        raise DocumentError(f"dims {dims} do not match Kraus shape {list(ops[0].shape)}")
    try:
        return KrausChannel(ops)
    except (QdynError, ValueError) as exc:
        raise DocumentError(f"invalid channel: {exc}") from None


def parse_measurement(doc: dict) -> Measurement:
    _expect(doc, "measurement", "channel")
    try:
        return Measurement(_matrix_list(doc))
    except DocumentError:
        raise
    except (QdynError, ValueError) as exc:
        raise DocumentError(f"invalid measurement: {exc}") from None


def parse_chain_spec(doc: dict) -> tuple[str, np.ndarray, MeasurementChain, dict]:
    """Return ``(chain_type, rho0, chain, params)``.

    ``data`` is one of::

        {"type": "amplitude-damping", "gamma": g, "alpha": a, "beta": b}
        {"type": "stern-gerlach", "axes": ["z", "x"], "initial": <matrix>}
        {"type": "explicit", "measurements": [[<matrix>, ...], ...], "initial": <matrix>}

    ``alpha`` and ``beta`` may be real numbers or ``[re, im]`` pairs.
    """
    _expect(doc, "chain-spec")
    data = doc["data"]
    if not isinstance(data, dict):
        raise DocumentError("chain-spec data must be an object")
    ctype = data.get("type")
    try:
        if ctype == "amplitude-damping":
            gamma = float(_decode_number(data.get("gamma"), "data.gamma").real)
            alpha = _decode_number(data.get("alpha", 0.0), "data.alpha")
            beta = _decode_number(data.get("beta", 1.0), "data.beta")
            chain = MeasurementChain([amplitude_damping_measurement(gamma)])
            rho0 = amplitude_damping_initial(alpha, beta)
            return ctype, rho0, chain, {"gamma": gamma, "alpha": alpha, "beta": beta}
        if ctype == "stern-gerlach":
            axes = data.get("axes")
            if not isinstance(axes, list) or not all(isinstance(a, str) for a in axes):
                raise DocumentError("data.axes must be a list of axis names")
            chain = stern_gerlach_chain(axes)
            rho0 = _initial(data, 2)
            return ctype, rho0, chain, {"axes": axes}
        if ctype == "explicit":
            ms = data.get("measurements")
            if not isinstance(ms, list) or not ms:
                raise DocumentError("data.measurements must be a non-empty list")
            steps = [
                Measurement([decode_matrix(m, f"data.measurements[{s}][{k}]") for k, m in enumerate(ops)])
                for s, ops in enumerate(ms)
            ]
            rho0 = _initial(data, steps[0].dim)
            return ctype, rho0, MeasurementChain(steps), {}
    except DocumentError:
        raise
    except (QdynError, ValueError) as exc:
        raise DocumentError(f"invalid chain spec: {exc}") from None
    raise DocumentError(f"unknown chain type {ctype!r}; expected amplitude-damping, stern-gerlach or explicit")


def _initial(data: dict, d: int) -> np.ndarray:
    if "initial" not in data:
        rho = np.zeros((d, d), dtype=np.complex128)
        rho[0, 0] = 1.0
        return rho
    return check_density(decode_matrix(data["initial"], "data.initial"))
