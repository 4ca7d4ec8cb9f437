"""Search domains, evaluated samples, the sample archive and objective normalization.

All objective vectors handled inside the package follow a maximization
convention. Raw objectives that are minimized are flipped by
:func:`normalize_objectives`.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

CONTINUOUS = "continuous"
CATEGORICAL = "categorical"


class ClampWarning(UserWarning):
    """Raised (as a warning) when a raw objective falls outside its declared range."""


@dataclass(frozen=True)
class SearchDomain:
    """A box of reals or a vector of categorical codes.

    Use :meth:`box` or :meth:`categorical` rather than the raw constructor.
    For categorical domains ``lower`` is all zeros and ``upper`` holds
    ``cardinality - 1``, so both kinds expose the same bounds for scaling.
    """

    kind: str
    lower: np.ndarray
    upper: np.ndarray
    cardinalities: tuple[int, ...] | None = None

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        if lower.ndim != 1 or lower.shape != upper.shape or lower.size == 0:
            raise ValueError("bounds must be non-empty vectors of equal length")
        if self.kind == CONTINUOUS:
            if not np.all(lower < upper):
                raise ValueError("lower bounds must be strictly below upper bounds")
        elif self.kind == CATEGORICAL:
            if self.cardinalities is None or any(c < 2 for c in self.cardinalities):
                raise ValueError("every categorical position needs at least 2 codes")
        else:
            raise ValueError(f"unknown domain kind {self.kind!r}")
        lower.setflags(write=False)
        upper.setflags(write=False)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def box(cls, lower: Sequence[float], upper: Sequence[float]) -> "SearchDomain":
        return cls(CONTINUOUS, np.asarray(lower, float), np.asarray(upper, float))

    @classmethod
    def categorical(cls, cardinalities: Sequence[int]) -> "SearchDomain":
        cards = tuple(int(c) for c in cardinalities)
        if any(c < 2 for c in cards):
            raise ValueError("every categorical position needs at least 2 codes")
        return cls(CATEGORICAL, np.zeros(len(cards)), np.asarray(cards, float) - 1.0, cards)

    @property
    def is_categorical(self) -> bool:
        return self.kind == CATEGORICAL

    def dimension(self) -> int:
        return int(self.lower.size)

    @property
    def widths(self) -> np.ndarray:
        return self.upper - self.lower

    def size(self) -> int | None:
        """Number of distinct design vectors (categorical only)."""
        if not self.is_categorical:
            return None
        return int(np.prod(self.cardinalities, dtype=np.int64))

    def sample_uniform(self, rng: np.random.Generator, n: int) -> np.ndarray:
        d = self.dimension()
        if self.is_categorical:
            cols = [rng.integers(0, c, size=n) for c in self.cardinalities]
            return np.column_stack(cols).astype(float) if n else np.empty((0, d))
        return self.lower + rng.random((n, d)) * self.widths

    def clip(self, X: np.ndarray) -> np.ndarray:
        """Clamp into the domain; categorical values are rounded to the nearest code."""
        X = np.clip(np.asarray(X, dtype=float), self.lower, self.upper)
        if self.is_categorical:
            X = np.rint(X)
        return X

    def to_unit(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.lower) / self.widths

    def contains_many(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.dimension():
            raise ValueError(f"expected dimension {self.dimension()}, got {X.shape[1]}")
        inside = np.all((X >= self.lower) & (X <= self.upper), axis=1)
        if self.is_categorical:
            inside &= np.all(X == np.rint(X), axis=1)
        return inside


def domain_contains(domain: SearchDomain, x: Sequence[float]) -> bool:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size != domain.dimension():
        raise ValueError(f"expected a vector of length {domain.dimension()}, got shape {x.shape}")
    return bool(domain.contains_many(x[None, :])[0])


@dataclass(frozen=True)
class ObjectiveSpec:
    name: str
    direction: str
    raw_min: float
    raw_max: float
    target: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        if self.direction not in ("maximize", "minimize"):
            raise ValueError(f"direction must be 'maximize' or 'minimize', got {self.direction!r}")
        if not self.raw_min < self.raw_max:
            raise ValueError(f"{self.name}: raw_min must be below raw_max")
        lo, hi = self.target
        if not lo < hi:
            raise ValueError(f"{self.name}: target range must be increasing")


@dataclass(frozen=True)
class NormalizationSpec:
    objectives: tuple[ObjectiveSpec, ...]

    def __len__(self):
        return len(self.objectives)

    @property
    def lower(self) -> np.ndarray:
        """Componentwise lower end of the target ranges (the default reference point)."""
        return np.array([o.target[0] for o in self.objectives])

    @property
    def upper(self) -> np.ndarray:
        return np.array([o.target[1] for o in self.objectives])

    def _coefficients(self):
        raw_min = np.array([o.raw_min for o in self.objectives])
        raw_max = np.array([o.raw_max for o in self.objectives])
        lo, hi = self.lower, self.upper
        slope = (hi - lo) / (raw_max - raw_min)
        minimize = np.array([o.direction == "minimize" for o in self.objectives])
        # maximize: raw_min -> lo; minimize: raw_min -> hi
        offset = np.where(minimize, hi + slope * raw_min, lo - slope * raw_min)
        slope = np.where(minimize, -slope, slope)
        return raw_min, raw_max, slope, offset


def normalize_objectives(raw, spec: NormalizationSpec, warn: bool = True) -> np.ndarray:
    """Map raw objective values onto their target ranges, flipping minimized ones.

    Accepts a single vector or an ``(n, M)`` array. Values outside the declared
    raw range are clamped and a :class:`ClampWarning` is emitted.
    """
    raw = np.asarray(raw, dtype=float)
    if raw.shape[-1] != len(spec):
        raise ValueError(f"expected {len(spec)} objectives, got {raw.shape[-1]}")
    raw_min, raw_max, slope, offset = spec._coefficients()
    clipped = np.clip(raw, raw_min, raw_max)
    if warn and np.any(clipped != raw):
        warnings.warn("raw objective outside declared range was clamped", ClampWarning, stacklevel=2)
    return slope * clipped + offset


def denormalize_objectives(values, spec: NormalizationSpec) -> np.ndarray:
    """Inverse of :func:`normalize_objectives` for in-range values."""
    values = np.asarray(values, dtype=float)
    if values.shape[-1] != len(spec):
        raise ValueError(f"expected {len(spec)} objectives, got {values.shape[-1]}")
    _, _, slope, offset = spec._coefficients()
    return (values - offset) / slope


@dataclass(frozen=True)
class EvaluatedSample:
    id: int
    x: np.ndarray
    v: np.ndarray


@dataclass
class Archive:
    """Insertion-ordered store of evaluated samples.

    Duplicate design vectors are kept (and counted in :attr:`n_duplicates`)
    but :meth:`unique_indices` exposes a view where each design appears once,
    which is what dominance numbers and hypervolume are computed on.
    """

    domain: SearchDomain
    n_objectives: int
    _X: list = field(default_factory=list, repr=False)
    _V: list = field(default_factory=list, repr=False)
    _seen: dict = field(default_factory=dict, repr=False)
    _unique: list = field(default_factory=list, repr=False)
    duplicate_flags: list = field(default_factory=list, repr=False)

    def __len__(self):
        return len(self._X)

    def add(self, x, v) -> int:
        x = np.asarray(x, dtype=float).ravel()
        v = np.asarray(v, dtype=float).ravel()
        if v.size != self.n_objectives:
            raise ValueError(f"expected {self.n_objectives} objectives, got {v.size}")
        if not np.all(np.isfinite(v)):
            raise ValueError("objective values must be finite")
        if not domain_contains(self.domain, x):
            raise ValueError(f"design vector {x.tolist()} lies outside the domain")
        sid = len(self._X)
        key = x.tobytes()
        duplicate = key in self._seen
        if not duplicate:
            self._seen[key] = sid
            self._unique.append(sid)
        self._X.append(x)
        self._V.append(v)
        self.duplicate_flags.append(duplicate)
        return sid

    def extend(self, X, V) -> list[int]:
        return [self.add(x, v) for x, v in zip(X, V)]

    @property
    def X(self) -> np.ndarray:
        return np.array(self._X).reshape(len(self._X), self.domain.dimension())

    @property
    def V(self) -> np.ndarray:
        return np.array(self._V).reshape(len(self._V), self.n_objectives)

    @property
    def n_duplicates(self) -> int:
        return len(self._X) - len(self._unique)

    def unique_indices(self, ids: Iterable[int] | None = None) -> np.ndarray:
        """Ids of first occurrences, optionally restricted to ``ids``."""
        if ids is None:
            return np.array(self._unique, dtype=int)
        return np.array([i for i in ids if self._seen[self._X[i].tobytes()] == i], dtype=int)

    def contains(self, x) -> bool:
        return np.asarray(x, dtype=float).ravel().tobytes() in self._seen

    def __getitem__(self, sid: int) -> EvaluatedSample:
        return EvaluatedSample(sid, self._X[sid], self._V[sid])

    def __iter__(self):
        return (self[i] for i in range(len(self)))
