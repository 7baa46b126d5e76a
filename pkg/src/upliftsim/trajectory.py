"""CSV export/import of interaction trajectories.

Agent view columns: ``t,C,E,x_0..x_{N-1}``. The oracle-extended variant
appends ``d,b_0..b_k,p_sim,u_0..``. Floats are written with ``repr`` so a
round trip is exact.
"""

from __future__ import annotations

import csv
from typing import Sequence

import numpy as np

from .environment import InteractionRecord
from .errors import DataError


def trajectory_header(n_observed: int, n_arms: int, n_confounders: int, oracle: bool) -> list[str]:
    cols = ["t", "C", "E"] + [f"x_{j}" for j in range(n_observed)]
    if oracle:
        cols += ["d"] + [f"b_{i}" for i in range(n_arms)] + ["p_sim"] + [f"u_{j}" for j in range(n_confounders)]
    return cols


def _f(v) -> str:
    return repr(float(v))


def write_trajectory_csv(path, records: Sequence[InteractionRecord], n_observed: int, n_arms: int,
                         n_confounders: int, oracle: bool = False) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(trajectory_header(n_observed, n_arms, n_confounders, oracle))
        for r in records:
            row = [r.t, r.C, r.E] + [_f(v) for v in r.x]
            if oracle:
                if not r.has_oracle:
                    raise DataError(f"record at t={r.t} lacks oracle fields")
                row += [_f(r.d)] + [_f(v) for v in r.b] + [_f(r.p_sim)] + [_f(v) for v in r.u]
            writer.writerow(row)


def read_trajectory_csv(path) -> list[InteractionRecord]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[:3] != ["t", "C", "E"]:
            raise DataError(f"{path}: not a trajectory file")
        xs = [i for i, c in enumerate(header) if c.startswith("x_")]
        bs = [i for i, c in enumerate(header) if c.startswith("b_")]
        us = [i for i, c in enumerate(header) if c.startswith("u_")]
        oracle = "d" in header
        records = []
        for row in reader:
            x = np.array([float(row[i]) for i in xs])
            fields = dict(t=int(row[0]), C=int(row[1]), E=int(row[2]), x=x)
            if oracle:
                fields.update(
                    d=float(row[header.index("d")]),
                    b=np.array([float(row[i]) for i in bs]),
                    p_sim=float(row[header.index("p_sim")]),
                    u=np.array([float(row[i]) for i in us]),
                )
            records.append(InteractionRecord(**fields))
    return records
