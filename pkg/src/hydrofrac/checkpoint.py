"""Binary checkpoints.

Layout (little-endian): magic ``b"HPE1"``, version ``u16``, ``n_x`` and ``n_z``
as ``u64``, ``t`` as ``f64``, then the physical ``u`` array row-major
(z rows, x fastest) as ``f64``.
"""

import struct

import numpy as np

from .dynamics import State

MAGIC = b"HPE1"
VERSION = 1
HEADER = struct.Struct("<4sHQQd")


class CheckpointError(IOError):
    pass


class MagicMismatch(CheckpointError):
    pass


class VersionMismatch(CheckpointError):
    pass


class TruncatedCheckpoint(CheckpointError):
    pass


def encode(state):
    u = np.ascontiguousarray(state.u, dtype="<f8")
    if u.ndim != 2:
        raise ValueError("checkpoint state must be a 2-D physical array")
    n_z1, n_x = u.shape
    return HEADER.pack(MAGIC, VERSION, n_x, n_z1 - 1, float(state.t)) + u.tobytes()


def decode(data):
    if len(data) < 4 or data[:4] != MAGIC:
        raise MagicMismatch(f"bad magic {bytes(data[:4])!r}, expected {MAGIC!r}")
    if len(data) < HEADER.size:
        raise TruncatedCheckpoint(f"header needs {HEADER.size} bytes, file has {len(data)}")
    _, version, n_x, n_z, t = HEADER.unpack_from(data)
    if version != VERSION:
        raise VersionMismatch(f"checkpoint version {version}, reader supports {VERSION}")
    need = HEADER.size + 8 * n_x * (n_z + 1)
    if len(data) < need:
        raise TruncatedCheckpoint(f"payload needs {need} bytes, file has {len(data)}")
    if len(data) > need:
        raise CheckpointError(f"{len(data) - need} trailing bytes after payload")
    u = np.frombuffer(data, dtype="<f8", offset=HEADER.size).reshape(n_z + 1, n_x)
    return State(u=u.astype(np.float64), t=t)


def write_checkpoint(path, state):
    with open(path, "wb") as fh:
        fh.write(encode(state))


def read_checkpoint(path):
    with open(path, "rb") as fh:
        return decode(fh.read())
