"""Binary snapshot/coefficient containers and CSV writers.

Container layout (little-endian)::

    magic  4 bytes  b"SCSD"
    version, n, subdivisions, d, m, K   six uint32
    payload                             float64, row-major

A snapshot file carries ``m`` parameter samples (``m x d``) followed by ``m``
nodal solutions (``m x K``). A coefficient file uses the same header with
``m`` set to the number of coefficients ``N`` and carries only the ``N x K``
array.
"""

from __future__ import annotations

import csv
import hashlib
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"SCSD"
VERSION = 1
_HEADER = struct.Struct("<4s6I")


class ContainerError(ValueError):
    pass


@dataclass
class Header:
    n: int
    subdivisions: int
    d: int
    m: int
    K: int
    version: int = VERSION

    def pack(self) -> bytes:
        return _HEADER.pack(MAGIC, self.version, self.n, self.subdivisions, self.d, self.m, self.K)


def _read_header(buf: bytes) -> Header:
    if len(buf) < _HEADER.size:
        raise ContainerError("file too short for a header")
    magic, version, n, subdivisions, d, m, K = _HEADER.unpack_from(buf)
    if magic != MAGIC:
        raise ContainerError(f"bad magic {magic!r}")
    if version != VERSION:
        raise ContainerError(f"unsupported container version {version}")
    return Header(n, subdivisions, d, m, K, version)


def _f64(arr) -> bytes:
    return np.ascontiguousarray(arr, dtype="<f8").tobytes()


def write_snapshots(path, samples, solutions, n: int, subdivisions: int) -> None:
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    solutions = np.atleast_2d(np.asarray(solutions, dtype=float))
    m, d = samples.shape
    if solutions.shape[0] != m:
        raise ValueError("samples and solutions disagree on m")
    head = Header(n, subdivisions, d, m, solutions.shape[1])
    Path(path).write_bytes(head.pack() + _f64(samples) + _f64(solutions))


def read_snapshots(path):
    """Return ``(header, samples (m, d), solutions (m, K))``."""
    buf = Path(path).read_bytes()
    head = _read_header(buf)
    n_samp, n_sol = head.m * head.d, head.m * head.K
    expected = _HEADER.size + 8 * (n_samp + n_sol)
    if len(buf) != expected:
        raise ContainerError(f"snapshot file has {len(buf)} bytes, expected {expected}")
    data = np.frombuffer(buf, dtype="<f8", offset=_HEADER.size)
    samples = data[:n_samp].reshape(head.m, head.d).astype(float)
    solutions = data[n_samp:].reshape(head.m, head.K).astype(float)
    return head, samples, solutions


def write_coefficients(path, coef, n: int, subdivisions: int, d: int) -> None:
    coef = np.atleast_2d(np.asarray(coef, dtype=float))
    head = Header(n, subdivisions, d, coef.shape[0], coef.shape[1])
    Path(path).write_bytes(head.pack() + _f64(coef))


def read_coefficients(path):
    """Return ``(header, coef (N, K))``; ``header.m`` holds ``N``."""
    buf = Path(path).read_bytes()
    head = _read_header(buf)
    expected = _HEADER.size + 8 * head.m * head.K
    if len(buf) != expected:
        raise ContainerError(f"coefficient file has {len(buf)} bytes, expected {expected}")
    data = np.frombuffer(buf, dtype="<f8", offset=_HEADER.size)
    return head, data.reshape(head.m, head.K).astype(float)


def array_checksum(arr) -> str:
    return hashlib.sha256(_f64(arr)).hexdigest()


def format_float(x: float) -> str:
    return repr(float(x))


DIAGNOSTIC_FIELDS = ["bregman_iter", "fpc_stage", "inner_iters", "residual_V2", "support_size"]
RESULT_FIELDS = ["method", "trial", "m", "rel_err_mean", "rel_err_std", "solver_flag", "wall_seconds"]


def write_csv(path, fieldnames, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: format_float(v) if isinstance(v, float) else v for k, v in row.items()})


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
