"""Base functions b(C, x', d) -> [0, 1]: the noiseless response surface of each arm.

Every base object is a pure, vectorised callable ``base(arm, x_prime, d)``
where ``x_prime`` has shape ``(..., M)`` and ``d`` is an already evaluated
drift value. The ``*_base`` functions at the bottom mirror the operation
signatures that take a time index and a drift schedule instead.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union

import numpy as np
from scipy.special import expit

from .context import ExtendedContext
from .drift import DriftSpec, eval_drift
from .errors import ConfigError


def _as_domain(x_prime, m: int | None = None) -> np.ndarray:
    if isinstance(x_prime, ExtendedContext):
        x_prime = x_prime.x_prime
    xp = np.asarray(x_prime, dtype=float)
    if xp.ndim == 0:
        raise ConfigError("M", "x' must be a vector")
    if m is not None and xp.shape[-1] != m:
        raise ConfigError("M", f"x' has {xp.shape[-1]} dimensions, base expects {m}")
    return xp


def _scalar(value):
    return float(value) if np.ndim(value) == 0 else value


@dataclass(frozen=True)
class SineBase:
    """``b_i = (sin(d + lambda_i * prod_m(x'_m + g_{i,m})) + 1) / 2``.

    ``g`` displaces the control arm. Treated arms are undisplaced unless
    ``displacements`` gives an explicit vector per arm.
    """

    lambdas: tuple[int, ...]
    g: tuple[float, ...]
    displacements: tuple[tuple[float, ...], ...] | None = None

    kind = "sine"

    @property
    def m(self) -> int:
        return len(self.g)

    @property
    def n_arms(self) -> int:
        return len(self.lambdas)

    def validate(self, where: str = "base") -> None:
        if len(self.lambdas) < 1:
            raise ConfigError(f"{where}.lambda", "needs one frequency per arm")
        for lam in self.lambdas:
            if int(lam) != lam or lam < 1:
                raise ConfigError(f"{where}.lambda", f"frequencies must be positive integers, got {lam}")
        if self.displacements is not None:
            if len(self.displacements) != len(self.lambdas):
                raise ConfigError(f"{where}.g_arms", "needs one displacement vector per arm")
            if any(len(g) != self.m for g in self.displacements):
                raise ConfigError(f"{where}.g_arms", "every displacement must have length M")

    def displacement(self, arm: int) -> np.ndarray:
        if self.displacements is not None:
            return np.asarray(self.displacements[arm], dtype=float)
        if arm == 0:
            return np.asarray(self.g, dtype=float)
        return np.zeros(self.m)

    def __call__(self, arm: int, x_prime, d: float):
        xp = _as_domain(x_prime, self.m)
        inner = np.prod(xp + self.displacement(arm), axis=-1)
        return _scalar(0.5 * (np.sin(d + self.lambdas[arm] * inner) + 1.0))


def select_dimensions(q: int, m: int, n_arms: int, seed: int, max_tries: int = 1000):
    """Freeze the dimension read by every factor of every polynomial term.

    Returns, per arm, a tuple of ``q - 1`` index tuples; term ``p`` (1-based)
    has ``p`` factors. Each arm's table is redrawn until it differs from the
    tables already assigned, whenever distinct tables exist at all.
    """
    rng = np.random.default_rng(seed)
    distinct_possible = q >= 2 and m >= 2
    tables: list[tuple[tuple[int, ...], ...]] = []
    for _ in range(n_arms):
        for _ in range(max_tries):
            table = tuple(tuple(int(j) for j in rng.integers(0, m, size=p)) for p in range(1, q))
            if not distinct_possible or table not in tables:
                break
        tables.append(table)
    return tuple(tables)


@dataclass(frozen=True)
class PolyBase:
    """``b_i = sigmoid((k_i + h(d) * 1) . v_i(x'))`` with monomial features.

    ``v_i(x') = (1, x'_{s1}, x'_{s2} x'_{s3}, ...)``: the p-th term multiplies
    p coordinates whose indices are drawn uniformly once from
    ``selector_seed``. ``h(z) = a + (b - a) (sin z + 1) / 2`` maps drift into
    ``h_range = (a, b)``.
    """

    q: int
    coefficients: tuple[tuple[float, ...], ...]
    m: int
    h_range: tuple[float, float] = (-0.5, 0.5)
    selector_seed: int = 0
    tables: tuple = field(init=False, repr=False, compare=False)

    kind = "polynomial"

    def __post_init__(self):
        tables = ()
        if int(self.q) == self.q and self.q >= 1 and self.m >= 1:
            tables = select_dimensions(int(self.q), self.m, len(self.coefficients), self.selector_seed)
        object.__setattr__(self, "tables", tables)

    @property
    def n_arms(self) -> int:
        return len(self.coefficients)

    def validate(self, where: str = "base") -> None:
        if int(self.q) != self.q or self.q < 1:
            raise ConfigError(f"{where}.q", f"must be a positive integer, got {self.q}")
        if self.m < 1:
            raise ConfigError("M", "must be >= 1")
        for i, k in enumerate(self.coefficients):
            if len(k) != self.q:
                raise ConfigError(f"{where}.k_i", f"arm {i} has {len(k)} coefficients, expected q={self.q}")
        seen = [tuple(map(float, k)) for k in self.coefficients]
        if len(set(seen)) != len(seen):
            raise ConfigError(f"{where}.k_i", "coefficient vectors must differ across arms")
        a, b = self.h_range
        if a > b:
            raise ConfigError(f"{where}.h_range", "requires a <= b")

    def h(self, d: float) -> float:
        a, b = self.h_range
        return a + (b - a) * (np.sin(d) + 1.0) / 2.0

    def features(self, arm: int, x_prime) -> np.ndarray:
        xp = _as_domain(x_prime, self.m)
        cols = [np.ones(xp.shape[:-1])]
        for idx in self.tables[arm]:
            cols.append(np.prod(xp[..., list(idx)], axis=-1))
        return np.stack(cols, axis=-1)

    def __call__(self, arm: int, x_prime, d: float):
        weights = np.asarray(self.coefficients[arm], dtype=float) + self.h(d)
        return _scalar(expit(self.features(arm, x_prime) @ weights))


def _lerp(a, b, t):
    # exact at t == 0, t == 1 and whenever a == b
    return np.where(t < 0.5, a + t * (b - a), b - (1.0 - t) * (b - a))


def multilinear(axes: Sequence[np.ndarray], values: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Interpolate ``values`` on the lattice ``axes`` at ``points`` of shape (n, m).

    Points are clamped onto the lattice hull first.
    """
    m = len(axes)
    lower, frac = [], []
    for j, axis in enumerate(axes):
        x = np.clip(points[:, j], axis[0], axis[-1])
        if len(axis) == 1:
            lower.append(np.zeros(len(x), dtype=int))
            frac.append(np.zeros(len(x)))
            continue
        i = np.clip(np.searchsorted(axis, x, side="right") - 1, 0, len(axis) - 2)
        lower.append(i)
        frac.append((x - axis[i]) / (axis[i + 1] - axis[i]))
    corners = []
    for offset in itertools.product((0, 1), repeat=m):
        index = tuple(np.minimum(lower[j] + offset[j], len(axes[j]) - 1) for j in range(m))
        corners.append(values[index])
    acc = np.stack(corners, axis=-1).reshape((len(points),) + (2,) * m)
    for j in reversed(range(m)):
        t = frac[j].reshape((len(points),) + (1,) * j)
        acc = _lerp(acc[..., 0], acc[..., 1], t)
    return acc


@dataclass(frozen=True, eq=False)
class TabulatedBase:
    """Multilinear interpolation of values stored on a regular lattice.

    Stands in for a previously trained model: it ignores both the arm index
    and the drift. Queries outside the lattice are clamped onto its hull.
    """

    axes: tuple[np.ndarray, ...]
    values: np.ndarray
    source: str | None = None

    kind = "tabulated"
    n_arms = None

    def __post_init__(self):
        axes = tuple(np.asarray(a, dtype=float) for a in self.axes)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "values", values)

    @property
    def m(self) -> int:
        return len(self.axes)

    def validate(self, where: str = "base") -> None:
        if self.values.shape != tuple(len(a) for a in self.axes):
            raise ConfigError(f"{where}.values", "value array does not match the lattice shape")
        for a in self.axes:
            if len(a) < 1 or np.any(np.diff(a) <= 0):
                raise ConfigError(f"{where}.axes", "lattice axes must be strictly increasing")
        if not np.all((self.values >= 0) & (self.values <= 1)):
            raise ConfigError(f"{where}.values", "stored values must lie in [0, 1]")

    def __call__(self, arm: int, x_prime, d: float = 0.0):
        xp = _as_domain(x_prime, self.m)
        flat = xp.reshape(-1, self.m)
        out = multilinear(self.axes, self.values, flat).reshape(xp.shape[:-1])
        return _scalar(out)

    @classmethod
    def constant(cls, value: float, m: int, low: float = -1.0, high: float = 1.0) -> "TabulatedBase":
        axes = tuple(np.array([low, high]) for _ in range(m))
        return cls(axes=axes, values=np.full((2,) * m, float(value)))


@dataclass(frozen=True)
class MixtureBase:
    """Convex combination of component bases, all sharing the arm index and drift."""

    components: tuple[tuple[float, "BaseFunction"], ...]

    kind = "mixture"

    @property
    def m(self) -> int:
        return self.components[0][1].m

    @property
    def n_arms(self):
        counts = [b.n_arms for _, b in self.components if b.n_arms is not None]
        return min(counts) if counts else None

    def validate(self, where: str = "base") -> None:
        if not self.components:
            raise ConfigError(f"{where}.components", "a mixture needs at least one component")
        weights = np.array([w for w, _ in self.components], dtype=float)
        if np.any(weights < 0):
            raise ConfigError(f"{where}.components", "weights must be non-negative")
        if abs(weights.sum() - 1.0) > 1e-9:
            raise ConfigError(f"{where}.components", f"weights sum to {weights.sum()!r}, not 1")
        for j, (_, comp) in enumerate(self.components):
            comp.validate(f"{where}.components[{j}].base")
            if comp.m != self.m:
                raise ConfigError(f"{where}.components[{j}]", "component domains must share M")

    def __call__(self, arm: int, x_prime, d: float):
        total = 0.0
        for w, comp in self.components:
            total = total + w * np.asarray(comp(arm, x_prime, d))
        return _scalar(np.clip(total, 0.0, 1.0))


BaseFunction = Union[SineBase, PolyBase, TabulatedBase, MixtureBase]


def sine_base(arm: int, x_prime, t: int, spec: SineBase, drift: DriftSpec):
    return spec(arm, x_prime, eval_drift(drift, t))


def poly_base(arm: int, x_prime, t: int, spec: PolyBase, drift: DriftSpec):
    return spec(arm, x_prime, eval_drift(drift, t))


def tabulated_base(arm: int, x_prime, spec: TabulatedBase):
    return spec(arm, x_prime)


def mixture_base(arm: int, x_prime, t: int, spec: MixtureBase, drift: DriftSpec):
    return spec(arm, x_prime, eval_drift(drift, t))


def write_grid_csv(path, axes: Sequence[np.ndarray], values: np.ndarray) -> None:
    """Write a lattice as ``dim_0,...,dim_{M-1},value`` rows in C order.

    ``path`` may also be an open text stream.
    """
    if hasattr(path, "write"):
        _write_grid(path, axes, values)
        return
    with open(path, "w", newline="") as fh:
        _write_grid(fh, axes, values)


def _write_grid(fh, axes, values) -> None:
    m = len(axes)
    mesh = np.meshgrid(*axes, indexing="ij")
    coords = [mesh[j].ravel().tolist() for j in range(m)]
    flat = np.asarray(values, dtype=float).ravel().tolist()
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow([f"dim_{j}" for j in range(m)] + ["value"])
    for n, v in enumerate(flat):
        writer.writerow([repr(c[n]) for c in coords] + [repr(v)])


def read_grid_csv(path) -> TabulatedBase:
    """Load a lattice CSV (as written by :func:`write_grid_csv`) into a tabulated base."""
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ConfigError("base.path", f"cannot read grid file {path}: {exc}") from exc
    if not rows:
        raise ConfigError("base.path", f"{path} is empty")
    header, body = rows[0], rows[1:]
    m = len(header) - 1
    if m < 1 or header != [f"dim_{j}" for j in range(m)] + ["value"]:
        raise ConfigError("base.path", f"{path}: header must be dim_0..dim_{{M-1}},value")
    try:
        data = np.array([[float(v) for v in row] for row in body], dtype=float)
    except ValueError as exc:
        raise ConfigError("base.path", f"{path}: non-numeric entry ({exc})") from exc
    if data.ndim != 2 or data.shape[1] != m + 1:
        raise ConfigError("base.path", f"{path}: ragged rows")
    axes = tuple(np.unique(data[:, j]) for j in range(m))
    shape = tuple(len(a) for a in axes)
    if int(np.prod(shape)) != len(data):
        raise ConfigError("base.path", f"{path}: rows do not form a complete lattice")
    values = np.full(shape, np.nan)
    index = tuple(np.searchsorted(axes[j], data[:, j]) for j in range(m))
    values[index] = data[:, m]
    if np.isnan(values).any():
        raise ConfigError("base.path", f"{path}: duplicate or missing lattice nodes")
    base = TabulatedBase(axes=axes, values=values, source=str(path))
    base.validate("base")
    return base
