"""File formats and deterministic JSON output.

States and operators travel as ``{"dims": [M, N], "matrix": [[[re, im], ...],
...]}`` with row-major MN x MN entries; certificates as
``{"precisionBits": k, "terms": [{"p": ..., "alpha": [[re, im], ...],
"beta": [...]}, ...]}``.  All floating-point output is written with 17
significant digits so doubles round-trip exactly.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .certify import SeparableCertificate
from .errors import InvalidInputError
from .hermops import DensityMatrix, HermitianOp


def _format_float(x: float) -> str:
    if not np.isfinite(x):
        raise InvalidInputError(f"cannot serialize non-finite value {x!r}")
    return format(float(x), ".17g")


def dumps(obj, indent: int = 2) -> str:
    """Deterministic JSON with 17-significant-digit floats."""

    def emit(node, depth: int) -> str:
        pad = " " * (indent * depth)
        inner = " " * (indent * (depth + 1))
        if isinstance(node, bool):
            return "true" if node else "false"
        if node is None:
            return "null"
        if isinstance(node, (int, np.integer)):
            return str(int(node))
        if isinstance(node, (float, np.floating)):
            return _format_float(float(node))
        if isinstance(node, str):
            return json.dumps(node)
        if isinstance(node, dict):
            if not node:
                return "{}"
            items = [f"{inner}{json.dumps(str(k))}: {emit(v, depth + 1)}"
                     for k, v in node.items()]
            return "{\n" + ",\n".join(items) + "\n" + pad + "}"
        if isinstance(node, (list, tuple, np.ndarray)):
            seq = list(node)
            if not seq:
                return "[]"
            items = [f"{inner}{emit(v, depth + 1)}" for v in seq]
            return "[\n" + ",\n".join(items) + "\n" + pad + "]"
        raise InvalidInputError(f"cannot serialize {type(node).__name__}")

    return emit(obj, 0) + "\n"


def complex_matrix_to_pairs(matrix: np.ndarray) -> list:
    return [[[float(v.real), float(v.imag)] for v in row] for row in np.asarray(matrix, dtype=complex)]


def complex_vector_to_pairs(vector: np.ndarray) -> list:
    return [[float(v.real), float(v.imag)] for v in np.asarray(vector, dtype=complex).reshape(-1)]


def _pairs_to_complex(data, what: str) -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"{what}: entries must be [re, im] pairs") from exc
    if arr.ndim < 1 or arr.shape[-1] != 2:
        raise InvalidInputError(f"{what}: entries must be [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def _load_json(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise InvalidInputError(f"{path}: top-level JSON object expected")
    return doc


def _operator_from_doc(doc: dict, what: str) -> tuple[tuple[int, int], np.ndarray]:
    if "dims" not in doc or "matrix" not in doc:
        raise InvalidInputError(f"{what}: 'dims' and 'matrix' fields are required")
    dims = doc["dims"]
    if (not isinstance(dims, (list, tuple)) or len(dims) != 2
            or not all(isinstance(d, int) and d >= 1 for d in dims)):
        raise InvalidInputError(f"{what}: dims must be two positive integers")
    matrix = _pairs_to_complex(doc["matrix"], what)
    side = dims[0] * dims[1]
    if matrix.shape != (side, side):
        raise InvalidInputError(f"{what}: matrix must be {side}x{side} for dims {dims}")
    return (int(dims[0]), int(dims[1])), matrix


def load_state(path) -> DensityMatrix:
    dims, matrix = _operator_from_doc(_load_json(path), f"state file {path}")
    return DensityMatrix(dims, matrix)


def load_operator(path) -> HermitianOp:
    dims, matrix = _operator_from_doc(_load_json(path), f"operator file {path}")
    return HermitianOp(dims, matrix)


def operator_to_doc(op: HermitianOp) -> dict:
    return {"dims": [op.dims[0], op.dims[1]], "matrix": complex_matrix_to_pairs(op.matrix)}


def save_operator(op: HermitianOp, path) -> None:
    Path(path).write_text(dumps(operator_to_doc(op)))


def load_certificate(path) -> SeparableCertificate:
    doc = _load_json(path)
    if "precisionBits" not in doc or "terms" not in doc:
        raise InvalidInputError(f"{path}: 'precisionBits' and 'terms' fields are required")
    bits = doc["precisionBits"]
    if not isinstance(bits, int) or bits < 1:
        raise InvalidInputError(f"{path}: precisionBits must be a positive integer")
    if not isinstance(doc["terms"], list) or not doc["terms"]:
        raise InvalidInputError(f"{path}: terms must be a nonempty list")
    terms = []
    for i, term in enumerate(doc["terms"]):
        what = f"{path}: term {i}"
        if not isinstance(term, dict) or not {"p", "alpha", "beta"} <= set(term):
            raise InvalidInputError(f"{what} needs fields p, alpha, beta")
        weight = term["p"]
        if not isinstance(weight, (int, float)):
            raise InvalidInputError(f"{what}: p must be a number")
        alpha = _pairs_to_complex(term["alpha"], what)
        beta = _pairs_to_complex(term["beta"], what)
        terms.append((float(weight), alpha, beta))
    return SeparableCertificate(tuple(terms), bits)


def certificate_to_doc(cert: SeparableCertificate) -> dict:
    return {
        "precisionBits": cert.precision_bits,
        "terms": [
            {"p": w, "alpha": complex_vector_to_pairs(a), "beta": complex_vector_to_pairs(b)}
            for w, a, b in cert.terms
        ],
    }
