"""Embeddings, binary codes, and retrieval over both.

An Embedding is the post-sigmoid activation vector of the network's last
layer, so every element lies strictly inside (0, 1). Thresholding at 0.5
turns it into a BinaryCode of the same length; the code doubles as secret
key material, so its byte packing is fixed (bit 0 is the most significant
bit of byte 0) to keep derived keys platform-independent.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .errors import FormatError

__all__ = [
    "Embedding",
    "BinaryCode",
    "binarize",
    "euclidean_dist2",
    "hamming",
    "topk_neighbors",
    "neighbor_overlap",
    "read_embedding",
    "write_embedding",
    "read_code",
    "write_code",
]


@dataclass(frozen=True)
class Embedding:
    """Real-valued activation vector with every element strictly in (0, 1)."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size == 0:
            raise ValueError("embedding must be a non-empty 1-D vector")
        if not np.all((values > 0.0) & (values < 1.0)):
            bad = int(np.argmin((values > 0.0) & (values < 1.0)))
            raise ValueError(
                f"embedding values must lie strictly in (0,1); values[{bad}] = {values[bad]}"
            )
        object.__setattr__(self, "values", values)

    @property
    def dim(self) -> int:
        return int(self.values.size)

    def __eq__(self, other):
        if not isinstance(other, Embedding):
            return NotImplemented
        return self.values.shape == other.values.shape and bool(
            np.all(self.values == other.values)
        )


@dataclass(frozen=True)
class BinaryCode:
    """Fixed-length bit sequence; bit 0 packs into the MSB of byte 0."""

    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=np.uint8)
        if bits.ndim != 1 or bits.size == 0:
            raise ValueError("code must be a non-empty 1-D bit vector")
        if not np.all((bits == 0) | (bits == 1)):
            raise ValueError("code bits must be 0 or 1")
        object.__setattr__(self, "bits", bits)

    @property
    def dim(self) -> int:
        return int(self.bits.size)

    def __eq__(self, other):
        if not isinstance(other, BinaryCode):
            return NotImplemented
        return self.bits.shape == other.bits.shape and bool(np.all(self.bits == other.bits))

    def to_bytes(self) -> bytes:
        if self.dim % 8 != 0:
            raise ValueError(f"code length {self.dim} is not a whole number of bytes")
        return np.packbits(self.bits).tobytes()

    def to_hex(self) -> str:
        if self.dim % 4 != 0:
            raise ValueError(f"code length {self.dim} is not a whole number of hex digits")
        # packbits pads trailing zero bits; one hex digit per 4 code bits
        return np.packbits(self.bits).tobytes().hex()[: self.dim // 4]

    @classmethod
    def from_hex(cls, text: str) -> "BinaryCode":
        if len(text) == 0:
            raise FormatError("hex: empty code")
        try:
            nibbles = [int(c, 16) for c in text]
        except ValueError:
            raise FormatError(f"hex: invalid hex digit in {text!r}") from None
        bits = [(n >> shift) & 1 for n in nibbles for shift in (3, 2, 1, 0)]
        return cls(np.array(bits, dtype=np.uint8))


def binarize(e: Embedding) -> BinaryCode:
    """Threshold an embedding at 0.5; ties (exactly 0.5) map to 1."""
    return BinaryCode((e.values >= 0.5).astype(np.uint8))


def euclidean_dist2(a: Embedding, b: Embedding) -> float:
    """Squared L2 distance between two embeddings of equal length."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    d = a.values - b.values
    return float(np.dot(d, d))


def hamming(a: BinaryCode, b: BinaryCode) -> int:
    """Number of differing bit positions between two equal-length codes."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return int(np.count_nonzero(a.bits != b.bits))


def topk_neighbors(
    query_index: int,
    corpus: Sequence[Union[Embedding, BinaryCode]],
    k: int,
) -> list[int]:
    """Indices of the k nearest corpus items to ``corpus[query_index]``.

    The metric follows the element type: squared L2 for embeddings, Hamming
    for binary codes. The query itself is excluded; ties break by ascending
    index.
    """
    n = len(corpus)
    if not 0 <= query_index < n:
        raise ValueError(f"query_index {query_index} out of range for corpus of {n}")
    if not 1 <= k < n:
        raise ValueError(f"k must satisfy 1 <= k < corpus size; got k={k}, size={n}")
    query = corpus[query_index]
    metric = euclidean_dist2 if isinstance(query, Embedding) else hamming
    ranked = sorted(
        (i for i in range(n) if i != query_index),
        key=lambda i: (metric(query, corpus[i]), i),
    )
    return ranked[:k]


def neighbor_overlap(real_ranking: Sequence[int], binary_ranking: Sequence[int]) -> float:
    """Fraction of shared indices between two equal-length rankings."""
    if len(real_ranking) != len(binary_ranking):
        raise ValueError(
            f"ranking length mismatch: {len(real_ranking)} vs {len(binary_ranking)}"
        )
    k = len(real_ranking)
    return len(set(real_ranking) & set(binary_ranking)) / k


def write_embedding(e: Embedding, path) -> None:
    doc = {"dim": e.dim, "values": [float(v) for v in e.values]}
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def read_embedding(path) -> Embedding:
    doc = _load_json(path)
    dim = _require_int(doc, "dim")
    values = doc.get("values")
    if not isinstance(values, list):
        raise FormatError("values: expected a list of numbers")
    if len(values) != dim:
        raise FormatError(f"values: expected {dim} entries per dim field, found {len(values)}")
    for i, v in enumerate(values):
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise FormatError(f"values[{i}]: not a number")
        if not 0.0 < float(v) < 1.0:
            raise FormatError(f"values[{i}]: {v} outside (0,1)")
    return Embedding(np.array(values, dtype=np.float64))


def write_code(code: BinaryCode, path) -> None:
    doc = {"dim": code.dim, "hex": code.to_hex()}
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def read_code(path) -> BinaryCode:
    doc = _load_json(path)
    dim = _require_int(doc, "dim")
    text = doc.get("hex")
    if not isinstance(text, str):
        raise FormatError("hex: expected a string")
    if dim % 4 != 0 or len(text) != dim // 4:
        raise FormatError(f"hex: expected {dim // 4} hex digits for dim {dim}, found {len(text)}")
    code = BinaryCode.from_hex(text)
    return code


def _load_json(path) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"document: invalid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise FormatError("document: expected a JSON object")
    return doc


def _require_int(doc: dict, field: str) -> int:
    value = doc.get(field)
    if not isinstance(value, int) or isinstance(value, bool) or value <= 0:
        raise FormatError(f"{field}: expected a positive integer, found {value!r}")
    return value
