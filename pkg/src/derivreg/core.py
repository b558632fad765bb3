"""Shared domain types: derivative indices, datasets, test functions, RNG streams, CSV I/O.

All estimation routines operate on the unit cube [0, 1]^k.  Raw data in other
units is mapped in with :func:`rescale_to_unit` and mapped back with the
returned affine maps.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

__all__ = [
    "DerivRegError",
    "ValidationError",
    "ParseError",
    "ToleranceError",
    "DerivIndex",
    "AffineMap",
    "rescale_to_unit",
    "DataSet",
    "load_csv",
    "save_csv",
    "RngStream",
    "split_stream",
    "TestFunction",
    "poly_function",
    "product_function",
]


class DerivRegError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(DerivRegError, ValueError):
    """Inputs violate a documented precondition (shape, domain, parameters)."""


class ParseError(ValidationError):
    """A file could not be parsed; carries the offending 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ToleranceError(DerivRegError):
    """A numerical check exceeded its stated tolerance."""


# ---------------------------------------------------------------------------
# Derivative indices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DerivIndex:
    """A 0/1 vector marking which coordinates are differentiated once.

    ``bits[i] == 1`` means the regression function is differentiated with
    respect to coordinate ``i``.  The all-zero index denotes the function
    itself.  Instances are immutable and hashable, so they can key dataset
    maps.
    """

    bits: tuple[int, ...]

    def __post_init__(self):
        if len(self.bits) < 1:
            raise ValidationError("DerivIndex needs k >= 1 coordinates")
        if any(b not in (0, 1) for b in self.bits):
            raise ValidationError(f"DerivIndex bits must be 0 or 1, got {self.bits}")

    @classmethod
    def zeros(cls, k: int) -> "DerivIndex":
        return cls((0,) * k)

    @classmethod
    def ones(cls, k: int) -> "DerivIndex":
        return cls((1,) * k)

    @classmethod
    def from_string(cls, s: str) -> "DerivIndex":
        if not s or any(c not in "01" for c in s):
            raise ValidationError(f"derivative index string must be nonempty 0/1, got {s!r}")
        return cls(tuple(int(c) for c in s))

    @classmethod
    def from_support(cls, k: int, support: Iterable[int]) -> "DerivIndex":
        sup = set(support)
        if any(i < 0 or i >= k for i in sup):
            raise ValidationError(f"support {sorted(sup)} out of range for k={k}")
        return cls(tuple(1 if i in sup else 0 for i in range(k)))

    @property
    def k(self) -> int:
        return len(self.bits)

    @property
    def order(self) -> int:
        """Number of differentiated coordinates (popcount)."""
        return sum(self.bits)

    @property
    def support(self) -> frozenset[int]:
        return frozenset(i for i, b in enumerate(self.bits) if b)

    def is_subset_of(self, other: "DerivIndex") -> bool:
        self._check_same_k(other)
        return all(a <= b for a, b in zip(self.bits, other.bits))

    def __or__(self, other: "DerivIndex") -> "DerivIndex":
        self._check_same_k(other)
        return DerivIndex(tuple(a | b for a, b in zip(self.bits, other.bits)))

    def __and__(self, other: "DerivIndex") -> "DerivIndex":
        self._check_same_k(other)
        return DerivIndex(tuple(a & b for a, b in zip(self.bits, other.bits)))

    def _check_same_k(self, other: "DerivIndex") -> None:
        if self.k != other.k:
            raise ValidationError(f"dimension mismatch: k={self.k} vs k={other.k}")

    def __str__(self) -> str:
        return "".join(str(b) for b in self.bits)


# ---------------------------------------------------------------------------
# Rescaling raw designs to the unit cube
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AffineMap:
    """Invertible map x -> (x - offset) / scale used for unit-cube rescaling."""

    offset: float
    scale: float

    def apply(self, x):
        return (np.asarray(x, dtype=float) - self.offset) / self.scale

    def invert(self, z):
        return self.offset + self.scale * np.asarray(z, dtype=float)


def rescale_to_unit(raw) -> tuple[np.ndarray, list[AffineMap]]:
    """Affinely map each column of ``raw`` onto [0, 1].

    Returns the scaled matrix and one :class:`AffineMap` per column; applying
    ``map.invert`` to a scaled column reproduces the input.  A constant column
    cannot be rescaled and raises :class:`ValidationError` naming the
    coordinate (1-based).
    """
    raw = np.asarray(raw, dtype=float)
    if raw.ndim == 1:
        raw = raw[:, None]
    scaled = np.empty_like(raw)
    maps = []
    for j in range(raw.shape[1]):
        lo = float(raw[:, j].min())
        hi = float(raw[:, j].max())
        if hi <= lo:
            raise ValidationError(f"coordinate {j + 1} is constant ({lo}); cannot rescale")
        m = AffineMap(lo, hi - lo)
        scaled[:, j] = m.apply(raw[:, j])
        maps.append(m)
    return scaled, maps


# ---------------------------------------------------------------------------
# Datasets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DataSet:
    """Design points in [0, 1]^k with responses for one derivative index.

    ``Y[i]`` is a noisy observation of the ``deriv`` mixed partial of the
    regression function at ``X[i]``.  Arrays are made read-only so datasets
    can be shared freely across threads.
    """

    k: int
    deriv: DerivIndex
    X: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        Y = np.asarray(self.Y, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.k:
            raise ValidationError(f"X must be (n, {self.k}), got shape {X.shape}")
        if Y.ndim != 1 or Y.shape[0] != X.shape[0]:
            raise ValidationError("X rows and Y must have equal count")
        if X.shape[0] < 1:
            raise ValidationError("n >= 1 required")
        if self.deriv.k != self.k:
            raise ValidationError(f"deriv has k={self.deriv.k}, dataset has k={self.k}")
        if X.size and (X.min() < 0.0 or X.max() > 1.0):
            bad = np.argwhere((X < 0.0) | (X > 1.0))[0]
            raise ValidationError(
                f"design coordinate x{bad[1] + 1}={X[bad[0], bad[1]]} outside [0, 1]"
            )
        X.setflags(write=False)
        Y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)

    @property
    def n(self) -> int:
        return self.X.shape[0]


def load_csv(path, k: int, deriv: DerivIndex) -> DataSet:
    """Read a dataset from CSV: header row, k coordinate columns, one response.

    Coordinates must already lie in [0, 1]; out-of-range values are rejected,
    not clamped.  Malformed cells raise :class:`ParseError` with the 1-based
    line number.
    """
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("missing header row", 1) from None
        if len(header) != k + 1:
            raise ParseError(f"expected {k + 1} columns, found {len(header)}", 1)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != k + 1:
                raise ParseError(f"expected {k + 1} cells, found {len(row)}", lineno)
            try:
                vals = [float(c) for c in row]
            except ValueError as exc:
                raise ParseError(str(exc), lineno) from None
            for j in range(k):
                if not 0.0 <= vals[j] <= 1.0:
                    raise ParseError(
                        f"coordinate x{j + 1}={vals[j]} outside [0, 1]", lineno
                    )
            rows.append(vals)
    if not rows:
        raise ValidationError("n >= 1 required: CSV has no data rows")
    arr = np.asarray(rows, dtype=float)
    return DataSet(k=k, deriv=deriv, X=arr[:, :k], Y=arr[:, k])


def save_csv(ds: DataSet, path) -> None:
    """Write a dataset as CSV using shortest round-trip decimal formatting."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{j + 1}" for j in range(ds.k)] + ["y"])
        for i in range(ds.n):
            writer.writerow([repr(float(v)) for v in ds.X[i]] + [repr(float(ds.Y[i]))])


# ---------------------------------------------------------------------------
# Reproducible RNG streams
# ---------------------------------------------------------------------------


@dataclass
class RngStream:
    """A seeded, path-addressed random stream.

    Identical ``(seed, path)`` pairs produce identical draws regardless of
    process or thread scheduling, because the underlying generator state is
    derived statelessly from the pair.  Streams with distinct paths are
    statistically independent.
    """

    seed: int
    path: tuple[int, ...]
    gen: np.random.Generator

    def uniform(self, size=None, low: float = 0.0, high: float = 1.0):
        return self.gen.uniform(low, high, size=size)

    def standard_normal(self, size=None):
        return self.gen.standard_normal(size=size)


def split_stream(seed: int, ids: Sequence[int]) -> RngStream:
    """Derive the stream addressed by ``ids`` (e.g. (replication, equation))."""
    path = tuple(int(i) for i in ids)
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=path)
    return RngStream(seed=int(seed), path=path, gen=np.random.Generator(np.random.PCG64(ss)))


# ---------------------------------------------------------------------------
# Test functions with exact mixed first partials
# ---------------------------------------------------------------------------


class TestFunction:
    """A k-variate function together with all its mixed first-order partials.

    ``deriv(alpha, pts)`` returns the partial in which each coordinate flagged
    by ``alpha`` is differentiated exactly once; the all-zero index returns
    the function itself.  Evaluation is vectorized over an (m, k) point array.
    """

    def __init__(self, k: int, eval_fn: Callable, deriv_fn: Callable, label: str = ""):
        self.k = k
        self._eval = eval_fn
        self._deriv = deriv_fn
        self.label = label

    def __call__(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return np.asarray(self._eval(pts), dtype=float)

    def deriv(self, alpha: DerivIndex, pts) -> np.ndarray:
        if alpha.k != self.k:
            raise ValidationError(f"alpha has k={alpha.k}, function has k={self.k}")
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if alpha.order == 0:
            return self(pts)
        return np.asarray(self._deriv(alpha, pts), dtype=float)

    def __repr__(self):
        return f"TestFunction(k={self.k}, {self.label!r})"


def poly_function(k: int, terms: dict[tuple[int, ...], float], label: str = "") -> TestFunction:
    """Polynomial test function from {exponent tuple: coefficient} terms."""
    for exps in terms:
        if len(exps) != k:
            raise ValidationError(f"exponent tuple {exps} does not have length {k}")

    def _eval_terms(tms, pts):
        out = np.zeros(pts.shape[0])
        for exps, coef in tms.items():
            mono = np.full(pts.shape[0], coef)
            for j, e in enumerate(exps):
                if e:
                    mono = mono * pts[:, j] ** e
            out += mono
        return out

    def _diff(tms, alpha):
        out: dict[tuple[int, ...], float] = {}
        for exps, coef in tms.items():
            e = list(exps)
            c = coef
            dead = False
            for j in alpha.support:
                if e[j] == 0:
                    dead = True
                    break
                c *= e[j]
                e[j] -= 1
            if not dead:
                key = tuple(e)
                out[key] = out.get(key, 0.0) + c
        return out

    return TestFunction(
        k,
        lambda pts: _eval_terms(terms, pts),
        lambda alpha, pts: _eval_terms(_diff(terms, alpha), pts),
        label=label or f"poly{terms}",
    )


def product_function(factors: Sequence[tuple[Callable, Callable]], label: str = "") -> TestFunction:
    """Separable product  g(x) = f_1(x_1) ... f_k(x_k)  from (f, f') pairs."""
    k = len(factors)

    def _eval(pts):
        out = np.ones(pts.shape[0])
        for j, (f, _) in enumerate(factors):
            out = out * f(pts[:, j])
        return out

    def _deriv(alpha, pts):
        out = np.ones(pts.shape[0])
        for j, (f, df) in enumerate(factors):
            out = out * (df(pts[:, j]) if alpha.bits[j] else f(pts[:, j]))
        return out

    return TestFunction(k, _eval, _deriv, label=label or "product")
