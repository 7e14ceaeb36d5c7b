"""Binary state container shared by amplitude tensors, density kernels, Wigner tables.

Layout (all little-endian):
    magic   4 bytes  b"RBQ1" (complex128 payload) or b"WIG1" (float64 payload)
    N       uint32   number of tensor axes
    M       uint32   points per axis (power of two >= 8)
    L       float64  domain length
    hbar    float64  action constant
    payload M^N values, row-major, axis 0 slowest

Density kernels reuse the RBQ1 layout with N = 2 interpreted as (row, column).
Loaders name the offending header field on failure.
"""

from __future__ import annotations

import struct

import numpy as np

from .grid import GridSpec, make_grid

_HEADER = struct.Struct("<4sIIdd")

MAGIC_STATE = b"RBQ1"
MAGIC_WIGNER = b"WIG1"

_DTYPE = {MAGIC_STATE: np.complex128, MAGIC_WIGNER: np.float64}


def write_container(path, magic: bytes, data: np.ndarray, grid: GridSpec) -> None:
    if magic not in _DTYPE:
        raise ValueError(f"unknown container magic {magic!r}")
    data = np.ascontiguousarray(data, dtype=_DTYPE[magic])
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(magic, data.ndim, grid.M, grid.L, grid.hbar))
        fh.write(data.astype(data.dtype.newbyteorder("<"), copy=False).tobytes())


def read_container(path, expect_magic: bytes | None = None):
    """Load (data, grid) from a container file, validating every header field."""
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) < _HEADER.size:
            raise ValueError("container header truncated")
        magic, N, M, L, hbar = _HEADER.unpack(head)
        if magic not in _DTYPE:
            raise ValueError(f"bad container field 'magic': {magic!r}")
        if expect_magic is not None and magic != expect_magic:
            raise ValueError(
                f"bad container field 'magic': expected {expect_magic!r}, got {magic!r}"
            )
        if N < 1 or N > 64:
            raise ValueError(f"bad container field 'N': {N}")
        try:
            grid = make_grid(L, M, hbar)
        except ValueError as exc:
            field = "M" if "M must" in str(exc) else ("L" if "L must" in str(exc) else "hbar")
            raise ValueError(f"bad container field {field!r}: {exc}") from exc
        dtype = np.dtype(_DTYPE[magic]).newbyteorder("<")
        payload = fh.read()
        expected = M**N * dtype.itemsize
        if len(payload) != expected:
            raise ValueError(
                f"bad container field 'N'/'M': payload holds {len(payload)} bytes, "
                f"header implies {expected}"
            )
        data = np.frombuffer(payload, dtype=dtype).astype(_DTYPE[magic])
        return data.reshape((M,) * N), grid
