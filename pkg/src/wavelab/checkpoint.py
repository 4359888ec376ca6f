"""Binary checkpoint format for evolution fields.

Layout: one UTF-8 header line
    wavelab-checkpoint v1 h=<h> n=<n> m=<m> iota=<iota> cone=<A|none> frames=<k>
followed by, per frame, little-endian float64: t, then the n samples of
U = r*u, then the n samples of dU/dt.
"""

from __future__ import annotations

import numpy as np

from .core import ModelParams, RadialGrid
from .field import SpaceTimeField

_MAGIC = "wavelab-checkpoint v1"


def save_checkpoint(path, field: SpaceTimeField, params: ModelParams) -> None:
    cone = "none" if field.cone_A is None else repr(float(field.cone_A))
    header = (
        f"{_MAGIC} h={field.grid.h!r} n={field.grid.n} m={params.m!r} "
        f"iota={params.iota} cone={cone} frames={field.n_frames}\n"
    )
    with open(path, "wb") as fh:
        fh.write(header.encode())
        for i in range(field.n_frames):
            rec = np.concatenate(([field.times[i]], field.U[i], field.Ut[i]))
            fh.write(rec.astype("<f8").tobytes())


def load_checkpoint(path) -> tuple[SpaceTimeField, ModelParams]:
    with open(path, "rb") as fh:
        header = fh.readline().decode().strip()
        if not header.startswith(_MAGIC):
            raise ValueError("not a wavelab checkpoint")
        kv = dict(tok.split("=", 1) for tok in header[len(_MAGIC) :].split())
        h = float(kv["h"])
        n = int(kv["n"])
        frames = int(kv["frames"])
        cone = None if kv["cone"] == "none" else float(kv["cone"])
        params = ModelParams(m=float(kv["m"]), iota=int(kv["iota"]))
        raw = np.frombuffer(fh.read(), dtype="<f8")
    rec_len = 1 + 2 * n
    if len(raw) != frames * rec_len:
        raise ValueError("truncated checkpoint payload")
    raw = raw.reshape(frames, rec_len)
    grid = RadialGrid(h=h, n=n)
    field = SpaceTimeField(grid, float(raw[0, 0]), raw[:, 1 : 1 + n].copy(), raw[:, 1 + n :].copy(), cone)
    return field, params
