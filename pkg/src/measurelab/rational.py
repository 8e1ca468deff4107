"""Exact rational frequency algebra.

Real frequencies are modeled as rational coordinate vectors over a declared
finite basis of symbols standing for rationally independent reals.  Under
that modeling axiom, integer-linear independence of frequencies is exactly
the rank of the coordinate matrix over the rationals, computed here with
fraction-free integer elimination (no floats anywhere).
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

import numpy as np

from .errors import DependentSetError, MeasureLabError


@dataclass(frozen=True)
class SymbolBasis:
    """Ordered, distinct names for the generating symbols."""

    names: tuple[str, ...]

    def __post_init__(self):
        names = tuple(str(n) for n in self.names)
        if not names:
            raise MeasureLabError("EMPTY_SET", "basis needs at least one symbol")
        if len(set(names)) != len(names):
            raise MeasureLabError("BASIS_MISMATCH", f"duplicate symbol names in {names}")
        object.__setattr__(self, "names", names)

    @property
    def size(self) -> int:
        return len(self.names)


_RATIONAL_RE = re.compile(r"^[+-]?\d+(/[1-9]\d*)?$")


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        # strict p/q form only: decimal or scientific floats are rejected
        if not _RATIONAL_RE.match(x.strip()):
            raise MeasureLabError("BAD_RATIONAL", f"expected p/q rational, got {x!r}")
        return Fraction(x.strip())
    raise MeasureLabError("BAD_RATIONAL", f"expected exact rational, got {type(x).__name__}")


@dataclass(frozen=True)
class FrequencyVector:
    """Exact rational coordinates of a frequency over a symbol basis."""

    basis: SymbolBasis
    coords: tuple[Fraction, ...]

    def __post_init__(self):
        coords = tuple(_as_fraction(c) for c in self.coords)
        if len(coords) != self.basis.size:
            raise MeasureLabError(
                "BASIS_MISMATCH",
                f"{len(coords)} coordinates for a basis of size {self.basis.size}",
            )
        object.__setattr__(self, "coords", coords)

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coords)

    def __add__(self, other: "FrequencyVector") -> "FrequencyVector":
        _require_common_basis([self, other])
        return FrequencyVector(self.basis, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> "FrequencyVector":
        return FrequencyVector(self.basis, tuple(-c for c in self.coords))

    def __sub__(self, other: "FrequencyVector") -> "FrequencyVector":
        return self + (-other)

    def __str__(self):
        terms = [f"{c}*{n}" for c, n in zip(self.coords, self.basis.names) if c != 0]
        return " + ".join(terms) if terms else "0"


def frequency(basis: SymbolBasis, *coords) -> FrequencyVector:
    """Convenience constructor accepting ints, Fractions or 'p/q' strings."""
    return FrequencyVector(basis, tuple(_as_fraction(c) for c in coords))


def _require_common_basis(vectors):
    basis = vectors[0].basis
    for v in vectors[1:]:
        if v.basis != basis:
            raise MeasureLabError("BASIS_MISMATCH", "vectors use different symbol bases")
    return basis


def _cleared_integer_rows(vectors) -> list[list[int]]:
    """Scale all vectors by one common denominator; preserves every integer relation."""
    denoms = [c.denominator for v in vectors for c in v.coords]
    common = 1
    for q in denoms:
        common = common * q // gcd(common, q)
    return [[int(c * common) for c in v.coords] for v in vectors]


def _bareiss_rank(rows: list[list[int]]) -> int:
    """Rank by fraction-free (Bareiss) elimination on exact integers."""
    m = [list(r) for r in rows]
    if not m:
        return 0
    nrows, ncols = len(m), len(m[0])
    rank = 0
    prev = 1
    for col in range(ncols):
        piv = None
        for i in range(rank, nrows):
            if m[i][col] != 0:
                piv = i
                break
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for i in range(rank + 1, nrows):
            for j in range(col + 1, ncols):
                m[i][j] = (m[i][j] * m[rank][col] - m[i][col] * m[rank][j]) // prev
            m[i][col] = 0
        prev = m[rank][col]
        rank += 1
        if rank == nrows:
            break
    return rank


def rank_over_Q(vectors) -> int:
    """Exact rank of the frequency set over the rationals."""
    vectors = list(vectors)
    if not vectors:
        return 0
    _require_common_basis(vectors)
    return _bareiss_rank(_cleared_integer_rows(vectors))


def integer_relation(vectors, bound: int):
    """Exhaustive search for integers m, |m_i| <= bound, with sum m_i v_i = 0.

    Returns the first nonzero relation in lexicographic order, or None.
    Complete only for relations within the bound; rank_over_Q is the
    authority on dependence.
    """
    vectors = list(vectors)
    if not vectors:
        return None
    _require_common_basis(vectors)
    rows = _cleared_integer_rows(vectors)
    n = len(rows)
    largest = max((abs(x) for row in rows for x in row), default=0)
    if largest * bound * n >= 2 ** 62:  # keep int64 arithmetic exact
        span = range(-bound, bound + 1)
        ncols = len(rows[0])
        for combo in itertools.product(span, repeat=n):
            if any(combo) and all(
                sum(c * row[j] for c, row in zip(combo, rows)) == 0 for j in range(ncols)
            ):
                return tuple(combo)
        return None
    span = np.arange(-bound, bound + 1, dtype=np.int64)
    combos = np.stack(np.meshgrid(*([span] * n), indexing="ij"), axis=-1).reshape(-1, n)
    mat = np.array(rows, dtype=np.int64)
    hits = np.flatnonzero(np.all(combos @ mat == 0, axis=1) & np.any(combos != 0, axis=1))
    if hits.size == 0:
        return None
    return tuple(int(c) for c in combos[hits[0]])


@dataclass(frozen=True)
class IndependentSet:
    """Frequencies verified rationally independent at construction."""

    gamma: tuple[FrequencyVector, ...]

    def __post_init__(self):
        if not self.gamma:
            raise MeasureLabError("EMPTY_SET", "an independent set needs at least one frequency")
        object.__setattr__(self, "gamma", tuple(self.gamma))
        _require_common_basis(self.gamma)
        if rank_over_Q(self.gamma) != len(self.gamma):
            raise DependentSetError("frequencies are rationally dependent")

    @property
    def basis(self) -> SymbolBasis:
        return self.gamma[0].basis

    @property
    def size(self) -> int:
        return len(self.gamma)


def make_independent_set(vectors) -> IndependentSet:
    """Build an IndependentSet, attaching a witness relation on failure."""
    vectors = list(vectors)
    if not vectors:
        raise MeasureLabError("EMPTY_SET", "an independent set needs at least one frequency")
    _require_common_basis(vectors)
    if rank_over_Q(vectors) != len(vectors):
        witness = integer_relation(vectors, bound=4) if len(vectors) <= 4 else None
        raise DependentSetError(
            f"rank {rank_over_Q(vectors)} < count {len(vectors)}", witness=witness
        )
    return IndependentSet(tuple(vectors))


def decompose(k: FrequencyVector, gamma: IndependentSet) -> np.ndarray:
    """Unique integers m with k = sum_i m_i gamma_i, if they exist.

    Raises NOT_IN_SPAN when no rational solution exists, NOT_INTEGRAL when
    the rational solution is not integer (k lies in the rational span but
    outside the generated subgroup).
    """
    _require_common_basis([k, *gamma.gamma])
    n = gamma.size
    b = gamma.basis.size
    # augmented system over Fractions: columns are the generators
    aug = [[gamma.gamma[j].coords[i] for j in range(n)] + [k.coords[i]] for i in range(b)]
    row = 0
    pivots = []
    for col in range(n):
        piv = next((i for i in range(row, b) if aug[i][col] != 0), None)
        if piv is None:
            continue
        aug[row], aug[piv] = aug[piv], aug[row]
        inv = aug[row][col]
        aug[row] = [x / inv for x in aug[row]]
        for i in range(b):
            if i != row and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[row])]
        pivots.append(col)
        row += 1
    for i in range(row, b):
        if aug[i][n] != 0:
            raise MeasureLabError("NOT_IN_SPAN", f"{k} is not in the rational span")
    sol = [Fraction(0)] * n
    for r, col in enumerate(pivots):
        sol[col] = aug[r][n]
    # independence means every column is a pivot; guard anyway
    if len(pivots) != n:
        raise MeasureLabError("NOT_IN_SPAN", "generator matrix lost rank")
    if any(s.denominator != 1 for s in sol):
        raise MeasureLabError(
            "NOT_INTEGRAL", f"{k} is in the rational span but needs non-integer weights {sol}"
        )
    return np.array([int(s) for s in sol], dtype=np.int64)


def refinement_matrix(gamma: IndependentSet, gamma_prime: IndependentSet) -> np.ndarray:
    """Integer matrix M with gamma_i = sum_j M[i, j] gamma_prime_j.

    Exists iff every generator of gamma lies in the subgroup generated by
    gamma_prime; then M induces the projection of the finer torus onto the
    coarser one.
    """
    rows = []
    for g in gamma.gamma:
        try:
            rows.append(decompose(g, gamma_prime))
        except MeasureLabError as exc:
            raise MeasureLabError(
                "NOT_REFINEMENT", f"{g} is not in the refined subgroup ({exc.code})"
            ) from exc
    return np.vstack(rows)


def scale(k: FrequencyVector, lam) -> FrequencyVector:
    """Exact coordinate-wise scaling by a nonzero rational."""
    lam = _as_fraction(lam)
    if lam == 0:
        raise MeasureLabError("ZERO_LAMBDA", "scaling factor must be nonzero")
    return FrequencyVector(k.basis, tuple(lam * c for c in k.coords))
