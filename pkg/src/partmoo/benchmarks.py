"""Evaluation targets: Branin-Currin, a generated tabular NAS-like table, and JSON tables."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import NormalizationSpec, ObjectiveSpec, SearchDomain, normalize_objectives
from .hypervolume import HvConfig, hypervolume

MAX_ENUMERATION = 10**7
_MASK64 = (1 << 64) - 1


class BenchmarkError(RuntimeError):
    """A benchmark could not evaluate a design vector."""


class TableParseError(ValueError):
    pass


def splitmix64(seed: int):
    """Infinite SplitMix64 stream of unsigned 64-bit integers."""
    state = seed & _MASK64
    while True:
        state = (state + 0x9E3779B97F4A7C15) & _MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        yield z ^ (z >> 31)


def _uniform(stream, lo: float, hi: float) -> float:
    return lo + (hi - lo) * ((next(stream) >> 11) * 2.0**-53)


# -- Branin-Currin -----------------------------------------------------------

BRANIN_RANGE = (0.397887357729738, 308.129096011607)
CURRIN_RANGE = (1.180408020862, 13.798722044729)


def branin(u, v):
    b = 5.1 / (4 * math.pi**2)
    c = 5 / math.pi
    t = 1 / (8 * math.pi)
    return (v - b * u**2 + c * u - 6) ** 2 + 10 * (1 - t) * np.cos(u) + 10


def currin(x1, x2):
    x2 = np.asarray(x2, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        # x2 -> 0 limit of the factor is 1
        factor = np.where(x2 > 0, -np.expm1(-1.0 / (2.0 * np.where(x2 > 0, x2, 1.0))), 1.0)
    return factor * (2300 * x1**3 + 1900 * x1**2 + 2092 * x1 + 60) / (
        100 * x1**3 + 500 * x1**2 + 4 * x1 + 20)


def branin_currin_raw(X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return np.column_stack([branin(15 * X[:, 0] - 5, 15 * X[:, 1]), currin(X[:, 0], X[:, 1])])


BRANIN_CURRIN_NORM = NormalizationSpec((
    ObjectiveSpec("branin", "minimize", *BRANIN_RANGE, target=(-1.0, 0.0)),
    ObjectiveSpec("currin", "minimize", *CURRIN_RANGE, target=(-1.0, 0.0)),
))


def eval_branin_currin(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (2,) or np.any(x < 0) or np.any(x > 1):
        raise ValueError(f"Branin-Currin is defined on [0, 1]^2, got {x.tolist()}")
    return normalize_objectives(branin_currin_raw(x)[0], BRANIN_CURRIN_NORM)


# -- benchmark containers ----------------------------------------------------

@dataclass
class ContinuousBenchmark:
    name: str
    domain: SearchDomain
    n_objectives: int
    function: Callable[[np.ndarray], np.ndarray]
    norm: NormalizationSpec
    hv_max: float | None = None

    @property
    def ref(self) -> np.ndarray:
        return self.norm.lower

    def evaluate_raw(self, X) -> np.ndarray:
        return self.function(X)


@dataclass
class TabularBenchmark:
    name: str
    domain: SearchDomain
    table: np.ndarray
    norm: NormalizationSpec
    complete: bool
    hv_max: float | None = None
    _normalized: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        with np.errstate(invalid="ignore"):
            filled = np.where(np.isnan(self.table), self.norm.lower, self.table)
            self._normalized = normalize_objectives(
                np.where(np.isnan(self.table), np.nan, filled), self.norm, warn=False)

    @property
    def n_objectives(self) -> int:
        return self.table.shape[1]

    @property
    def ref(self) -> np.ndarray:
        return self.norm.lower

    @property
    def strides(self) -> np.ndarray:
        cards = np.asarray(self.domain.cardinalities, dtype=np.int64)
        return np.concatenate([np.cumprod(cards[::-1])[::-1][1:], [1]])

    def index_of(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if not np.all(self.domain.contains_many(X)):
            raise BenchmarkError("design vector outside the tabular domain")
        return np.rint(X).astype(np.int64) @ self.strides

    def decode(self, index) -> np.ndarray:
        index = np.atleast_1d(np.asarray(index, dtype=np.int64))
        cards = np.asarray(self.domain.cardinalities, dtype=np.int64)
        return ((index[:, None] // self.strides) % cards).astype(float)

    def evaluate_raw(self, X) -> np.ndarray:
        rows = self.table[self.index_of(X)]
        if np.isnan(rows).any():
            raise BenchmarkError("no table row for a requested encoding")
        return rows

    def all_normalized(self) -> np.ndarray:
        """Normalized objectives of every present row, in enumeration order."""
        present = ~np.isnan(self.table).any(axis=1)
        return self._normalized[present]


def evaluate(benchmark, X) -> np.ndarray:
    """Normalized objective vectors for the rows of ``X`` (or a single vector)."""
    X = np.asarray(X, dtype=float)
    single = X.ndim == 1
    X2 = np.atleast_2d(X)
    if isinstance(benchmark, TabularBenchmark):
        out = benchmark._normalized[benchmark.index_of(X2)]
        if np.isnan(out).any():
            raise BenchmarkError("no table row for a requested encoding")
    else:
        if not np.all(benchmark.domain.contains_many(X2)):
            raise BenchmarkError("design vector outside the benchmark domain")
        out = normalize_objectives(benchmark.evaluate_raw(X2), benchmark.norm)
    return out[0] if single else out


def branin_currin() -> ContinuousBenchmark:
    return ContinuousBenchmark("branin-currin", SearchDomain.box([0.0, 0.0], [1.0, 1.0]), 2,
                               branin_currin_raw, BRANIN_CURRIN_NORM)


def _full_hv(bench: TabularBenchmark) -> float:
    return hypervolume(bench.all_normalized(), bench.ref, HvConfig())


def gen_synthetic_nas(seed: int = 0, dims: int = 6, card: int = 5) -> TabularBenchmark:
    """Enumerable two-objective table shaped like a cell-encoded NAS space.

    Objective order is (quality: maximize -> [0, 1], cost: minimize -> [-1, 0]),
    so the reference point is (0, -1).
    """
    if dims < 2 or card < 2:
        raise ValueError("need dims >= 2 and card >= 2")
    if card**dims > MAX_ENUMERATION:
        raise ValueError(f"{card}^{dims} encodings exceed the enumeration budget")
    stream = splitmix64(seed)
    scores = np.array([[_uniform(stream, 0.0, 1.0) for _ in range(card)] for _ in range(dims)])
    pairs = {}
    for i in range(dims):
        for j in range(i + 1, dims):
            pairs[i, j] = np.array([[_uniform(stream, -0.1, 0.1) for _ in range(card)]
                                    for _ in range(card)])
    costs = np.array([[_uniform(stream, 1.0, 10.0) for _ in range(card)] for _ in range(dims)])

    domain = SearchDomain.categorical([card] * dims)
    codes = np.indices([card] * dims).reshape(dims, -1).T
    quality = np.zeros(len(codes))
    for i in range(dims):
        quality = quality + scores[i, codes[:, i]]
    for (i, j), table in pairs.items():
        quality = quality + table[codes[:, i], codes[:, j]]
    cost = np.zeros(len(codes))
    for i in range(dims):
        cost = cost + costs[i, codes[:, i]]
    raw = np.column_stack([quality, cost])
    norm = NormalizationSpec((
        ObjectiveSpec("quality", "maximize", float(quality.min()), float(quality.max()), (0.0, 1.0)),
        ObjectiveSpec("cost", "minimize", float(cost.min()), float(cost.max()), (-1.0, 0.0)),
    ))
    bench = TabularBenchmark(f"synthetic-nas:{seed}", domain, raw, norm, complete=True)
    bench.hv_max = _full_hv(bench)
    return bench


def load_tabular(path, norm_override: NormalizationSpec | None = None) -> TabularBenchmark:
    """Read a JSON table (see README for the schema)."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise TableParseError(f"{path}: invalid JSON: {exc}") from exc
    for key in ("dims", "cardinalities", "objectives", "rows"):
        if key not in doc:
            raise TableParseError(f"{path}: missing key {key!r}")
    dims = doc["dims"]
    cards = doc["cardinalities"]
    if not isinstance(cards, list) or len(cards) != dims:
        raise TableParseError(f"{path}: cardinalities must list {dims} entries")
    domain = SearchDomain.categorical(cards)
    n_rows = domain.size()
    if n_rows > MAX_ENUMERATION:
        raise TableParseError(f"{path}: {n_rows} encodings exceed the enumeration budget")
    objectives = doc["objectives"]
    m = len(objectives)
    if m < 2:
        raise TableParseError(f"{path}: need at least two objectives")

    table = np.full((n_rows, m), np.nan)
    probe = TabularBenchmark.__new__(TabularBenchmark)
    probe.domain = domain
    strides = probe.strides
    for k, row in enumerate(doc["rows"], start=1):
        try:
            x = np.asarray(row["x"], dtype=float)
            v = np.asarray(row["v"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise TableParseError(f"{path}: row {k}: malformed ({exc})") from exc
        if x.shape != (dims,):
            raise TableParseError(f"{path}: row {k}: encoding has {x.size} codes, expected {dims}")
        if v.shape != (m,) or not np.all(np.isfinite(v)):
            raise TableParseError(f"{path}: row {k}: expected {m} finite objective values")
        if not domain.contains_many(x)[0]:
            raise TableParseError(f"{path}: row {k}: encoding {row['x']} outside cardinalities")
        idx = int(np.rint(x).astype(np.int64) @ strides)
        if not np.isnan(table[idx, 0]):
            raise TableParseError(f"{path}: row {k}: duplicate encoding {row['x']}")
        table[idx] = v

    if norm_override is not None:
        norm = norm_override
    else:
        specs = []
        for j, obj in enumerate(objectives):
            direction = obj.get("direction", "maximize")
            column = table[:, j][~np.isnan(table[:, j])]
            raw_min = obj.get("raw_min", float(column.min()))
            raw_max = obj.get("raw_max", float(column.max()))
            default_target = (0.0, 1.0) if direction == "maximize" else (-1.0, 0.0)
            target = tuple(obj.get("target", default_target))
            try:
                specs.append(ObjectiveSpec(obj.get("name", f"f{j}"), direction, raw_min, raw_max,
                                           target))
            except ValueError as exc:
                raise TableParseError(f"{path}: objective {j}: {exc}") from exc
        norm = NormalizationSpec(tuple(specs))
    complete = not np.isnan(table).any()
    bench = TabularBenchmark(doc.get("name", str(path)), domain, table, norm, complete)
    if complete:
        bench.hv_max = _full_hv(bench)
    return bench


def make_benchmark(name: str):
    """Resolve a CLI benchmark name: ``branin-currin``, ``synthetic-nas[:seed]``, ``tabular:<path>``."""
    if name == "branin-currin":
        return branin_currin()
    if name == "synthetic-nas" or name.startswith("synthetic-nas:"):
        seed = int(name.split(":", 1)[1]) if ":" in name else 0
        return gen_synthetic_nas(seed)
    if name.startswith("tabular:"):
        return load_tabular(name.split(":", 1)[1])
    raise ValueError(f"unknown benchmark {name!r}")
