"""Haar measure on the finite-dimensional torus shadows of the morphism group.

Every rationally independent frequency set gamma of size n pins down an
n-torus of group morphisms; its normalized Haar measure is the uniform
distribution of the n angle coordinates.  Cylindrical observables are finite
trigonometric polynomials in the characters, so their Haar integrals are
exact (the zero-mode coefficient) and Monte Carlo only confirms.  The
rescaling action on frequencies permutes characters, which makes invariance
of an observable a finite exact check on its coefficient map.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _kernels
from .errors import MeasureLabError
from .rational import (
    FrequencyVector,
    IndependentSet,
    SymbolBasis,
    _as_fraction,
    decompose,
    refinement_matrix,
    scale,
)
from .rng import RngState

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class TorusPoint:
    """A point of the torus attached to gamma, as one angle per generator."""

    gamma: IndependentSet
    theta: tuple[float, ...]

    def __post_init__(self):
        th = tuple(float(t) % TWO_PI for t in self.theta)
        if len(th) != self.gamma.size:
            raise MeasureLabError(
                "GAMMA_MISMATCH", f"{len(th)} angles for {self.gamma.size} generators"
            )
        object.__setattr__(self, "theta", th)


@dataclass(frozen=True)
class CylFunction:
    """Trigonometric polynomial on the torus of gamma.

    ``coeffs`` maps integer exponent vectors (length = number of generators)
    to complex coefficients.
    """

    gamma: IndependentSet
    coeffs: dict

    def __post_init__(self):
        n = self.gamma.size
        clean = {}
        for m, c in self.coeffs.items():
            key = tuple(int(x) for x in m)
            if len(key) != n:
                raise MeasureLabError("GAMMA_MISMATCH", f"exponent {key} has wrong length")
            if c != 0:
                clean[key] = complex(c)
        object.__setattr__(self, "coeffs", clean)

    def zero_vector(self) -> tuple[int, ...]:
        return (0,) * self.gamma.size


@dataclass(frozen=True)
class GlobalTrigPoly:
    """Finite character sum indexed by exact frequencies over one basis."""

    terms: dict

    def __post_init__(self):
        clean = {}
        basis = None
        for k, c in self.terms.items():
            if not isinstance(k, FrequencyVector):
                raise MeasureLabError("BASIS_MISMATCH", "keys must be FrequencyVector")
            if basis is None:
                basis = k.basis
            elif k.basis != basis:
                raise MeasureLabError("BASIS_MISMATCH", "terms mix symbol bases")
            if c != 0:
                clean[k] = complex(c)
        object.__setattr__(self, "terms", clean)

    def coeff(self, k: FrequencyVector) -> complex:
        return self.terms.get(k, 0.0 + 0.0j)

    def is_constant(self) -> bool:
        return all(k.is_zero() for k in self.terms)

    def constant_term(self) -> complex:
        """Coefficient at frequency zero, the exact invariant-measure integral."""
        for k, c in self.terms.items():
            if k.is_zero():
                return c
        return 0.0 + 0.0j


@dataclass(frozen=True)
class ArcSet:
    """Finite union of disjoint half-open arcs on the circle.

    Endpoints are exact fractions of a full turn, so the total measure r is
    an exact rational and r**N carries no rounding.
    """

    arcs: tuple

    def __post_init__(self):
        arcs = tuple(
            (_as_fraction(lo), _as_fraction(hi)) for lo, hi in self.arcs
        )
        for lo, hi in arcs:
            if not (0 <= lo < hi <= 1):
                raise MeasureLabError("BAD_ARC", f"arc [{lo}, {hi}) outside the unit turn")
        ordered = sorted(arcs)
        for (_, hi), (lo, _) in zip(ordered, ordered[1:]):
            if lo < hi:
                raise MeasureLabError("BAD_ARC", "arcs overlap")
        object.__setattr__(self, "arcs", tuple(ordered))

    @classmethod
    def from_measure(cls, r) -> "ArcSet":
        """Single arc [0, r) of exact Haar measure r."""
        return cls(((Fraction(0), _as_fraction(r)),))

    @property
    def measure(self) -> Fraction:
        return sum((hi - lo for lo, hi in self.arcs), Fraction(0))

    def contains_turns(self, turns: np.ndarray) -> np.ndarray:
        turns = np.asarray(turns)
        inside = np.zeros(turns.shape, dtype=bool)
        for lo, hi in self.arcs:
            inside |= (turns >= float(lo)) & (turns < float(hi))
        return inside


def haar_sample(gamma: IndependentSet, rng: RngState) -> TorusPoint:
    """Uniform angles, the push-forward of the invariant measure to this torus."""
    gen = rng.generator()
    return TorusPoint(gamma, tuple(gen.uniform(0.0, TWO_PI, gamma.size)))


def evaluate_point(point: TorusPoint, k: FrequencyVector) -> complex:
    """Character value x(k) = exp(i m . theta), with m the subgroup coordinates of k."""
    m = decompose(k, point.gamma)
    return cmath.exp(1j * float(np.dot(m, point.theta)))


def evaluate(func: CylFunction, point: TorusPoint) -> complex:
    if func.gamma != point.gamma:
        raise MeasureLabError("GAMMA_MISMATCH", "function and point use different generators")
    total = 0.0 + 0.0j
    for m, c in func.coeffs.items():
        total += c * cmath.exp(1j * float(np.dot(m, point.theta)))
    return total


def integrate_exact(func: CylFunction) -> complex:
    """Haar integral of a trigonometric polynomial: its zero-mode coefficient."""
    return func.coeffs.get(func.zero_vector(), 0.0 + 0.0j)


def _coeff_arrays(func: CylFunction):
    if not func.coeffs:
        return (
            np.zeros(1, dtype=np.complex128),
            np.zeros((1, func.gamma.size), dtype=np.int64),
        )
    ms = np.array(list(func.coeffs.keys()), dtype=np.int64)
    cs = np.array(list(func.coeffs.values()), dtype=np.complex128)
    return cs, ms


def _sample_angles(n: int, count: int, rng: RngState) -> np.ndarray:
    return rng.generator().uniform(0.0, TWO_PI, (count, n))


def integrate_mc(func: CylFunction, replicas: int, rng: RngState) -> tuple[complex, float]:
    """Monte-Carlo Haar integral with stderr of the mean."""
    if replicas < 100:
        raise MeasureLabError("TOO_FEW_SAMPLES", f"need >= 100 samples, got {replicas}")
    cs, ms = _coeff_arrays(func)
    thetas = _sample_angles(func.gamma.size, replicas, rng)
    vals = _kernels.trig_eval(cs, ms, thetas)
    est = complex(vals.mean())
    var = vals.real.var(ddof=1) + vals.imag.var(ddof=1)
    return est, float(math.sqrt(var / replicas))


def character_gram(gamma: IndependentSet, ms, replicas: int, rng: RngState) -> np.ndarray:
    """Monte-Carlo Gram matrix of the characters with the given exponents.

    Distinct exponent vectors give orthogonal characters, so off-diagonal
    entries vanish within sampling error no matter how close the underlying
    real frequencies are; diagonal entries are exactly one per sample.
    """
    mv = np.array([tuple(int(x) for x in m) for m in ms], dtype=np.int64)
    if len({tuple(r) for r in mv}) != len(mv):
        raise MeasureLabError("GAMMA_MISMATCH", "exponent vectors must be distinct")
    thetas = _sample_angles(gamma.size, replicas, rng)
    e = np.exp(1j * thetas @ mv.T.astype(np.float64))
    return (e.T @ np.conj(e)) / replicas


@dataclass(frozen=True)
class PushforwardReport:
    """Both integration routes for a cylindrical function under refinement."""

    exact_direct: complex
    exact_transported: complex
    mc_estimate: complex
    mc_stderr: float

    @property
    def exact_match(self) -> bool:
        return self.exact_direct == self.exact_transported

    @property
    def mc_within_3sigma(self) -> bool:
        return abs(self.mc_estimate - self.exact_direct) <= 3.0 * max(self.mc_stderr, 1e-15)


def transport_to_refinement(func: CylFunction, gamma_prime: IndependentSet) -> CylFunction:
    """Rewrite a polynomial on gamma as one on the finer generator set.

    With gamma_i = sum_j M[i, j] gamma'_j, the character with exponent m
    pulls back to the character with exponent M^T m.
    """
    mat = refinement_matrix(func.gamma, gamma_prime)
    out: dict = {}
    for m, c in func.coeffs.items():
        key = tuple(int(x) for x in mat.T @ np.array(m, dtype=np.int64))
        out[key] = out.get(key, 0.0 + 0.0j) + c
    return CylFunction(gamma_prime, out)


def pushforward_check(
    gamma: IndependentSet,
    gamma_prime: IndependentSet,
    func: CylFunction,
    replicas: int,
    rng: RngState,
) -> PushforwardReport:
    """Integrate on gamma directly and through the refinement, then compare.

    The refinement matrix has full row rank, so the pulled-back polynomial
    has the same zero-mode coefficient; uniform angles on the finer torus
    push forward to uniform angles on the coarser one, which the Monte-Carlo
    route exercises numerically.
    """
    if func.gamma != gamma:
        raise MeasureLabError("GAMMA_MISMATCH", "function must live on the coarse set")
    mat = refinement_matrix(gamma, gamma_prime)
    direct = integrate_exact(func)
    transported = integrate_exact(transport_to_refinement(func, gamma_prime))
    cs, ms = _coeff_arrays(func)
    thetas_fine = _sample_angles(gamma_prime.size, replicas, rng)
    thetas = (thetas_fine @ mat.T.astype(np.float64)) % TWO_PI
    vals = _kernels.trig_eval(cs, ms, thetas)
    est = complex(vals.mean())
    var = vals.real.var(ddof=1) + vals.imag.var(ddof=1)
    return PushforwardReport(direct, transported, est, float(math.sqrt(var / replicas)))


@dataclass(frozen=True)
class ZnRow:
    depth: int
    exact: Fraction
    mc_freq: float
    binom_sigma: float

    @property
    def within_3sigma(self) -> bool:
        return abs(self.mc_freq - float(self.exact)) <= 3.0 * self.binom_sigma


def zn_probability(arcs: ArcSet, depths, replicas: int, rng: RngState) -> list[ZnRow]:
    """Probability that the first N independent characters all land in the arcs.

    Independence of the frequencies makes the N character values independent
    uniform angles, so the exact probability is r**N with r the arc measure,
    computed in exact rationals.  One batch of samples serves all requested
    prefix depths.
    """
    r = arcs.measure
    if not (0 < r < 1):
        raise MeasureLabError("BAD_ARC", f"need arc measure strictly between 0 and 1, got {r}")
    depths = [int(n) for n in depths]
    if any(n < 0 for n in depths):
        raise MeasureLabError("BAD_ARC", "prefix depths must be nonnegative")
    max_depth = max(depths, default=0)
    counts = np.zeros(max_depth, dtype=np.int64)
    if max_depth > 0:
        turns = rng.generator().uniform(0.0, 1.0, (replicas, max_depth))
        counts = _kernels.prefix_all_count(arcs.contains_turns(turns))
    rows = []
    for n in depths:
        exact = r ** n
        freq = 1.0 if n == 0 else counts[n - 1] / replicas
        sigma = math.sqrt(float(exact) * (1.0 - float(exact)) / replicas)
        rows.append(ZnRow(n, exact, float(freq), sigma))
    return rows


def act_scale(psi: GlobalTrigPoly, lam) -> GlobalTrigPoly:
    """Push the observable through the frequency rescaling k -> lam * k."""
    out = {scale(k, lam): c for k, c in psi.terms.items()}
    if len(out) != len(psi.terms):
        raise MeasureLabError("ZERO_LAMBDA", "rescaling collapsed distinct frequencies")
    return GlobalTrigPoly(out)


def is_invariant(psi: GlobalTrigPoly, lam) -> bool:
    """Exact coefficient test c(k) == c(lam k) over the support and its image."""
    lam = _as_fraction(lam)
    if lam == 0:
        raise MeasureLabError("ZERO_LAMBDA", "scaling factor must be nonzero")
    support = set(psi.terms) | {scale(k, lam) for k in psi.terms}
    return all(psi.coeff(k) == psi.coeff(scale(k, lam)) for k in support)


@dataclass(frozen=True)
class ErgodicityReport:
    trials: int
    invariant_nonconstant: int
    constants_all_invariant: bool
    minus_one_exception_holds: bool


def _random_rational(gen, num_range, den_range, exclude_unit=False) -> Fraction:
    while True:
        num = int(gen.integers(-num_range, num_range + 1))
        den = int(gen.integers(1, den_range + 1))
        lam = Fraction(num, den)
        if lam == 0:
            continue
        if exclude_unit and abs(lam) == 1:
            continue
        return lam


def _random_poly(gen, basis: SymbolBasis) -> GlobalTrigPoly:
    terms: dict = {}
    n_terms = int(gen.integers(1, 5))
    while len([k for k in terms if not k.is_zero()]) == 0 or len(terms) < n_terms:
        coords = tuple(
            Fraction(int(gen.integers(-3, 4)), int(gen.integers(1, 4))) for _ in basis.names
        )
        k = FrequencyVector(basis, coords)
        if k in terms:
            continue
        c = complex(float(gen.uniform(0.2, 1.0)), float(gen.uniform(0.2, 1.0)))
        terms[k] = c
    return GlobalTrigPoly(terms)


def ergodicity_suite(trials: int, rng: RngState) -> ErgodicityReport:
    """Search for invariant nonconstant observables under random rescalings.

    Any observable with a nonzero coefficient at a nonzero frequency would
    need equal coefficients along the whole infinite rescaling orbit of that
    frequency, impossible with finite support, so the expected count of
    invariant nonconstant trials is exactly zero.  Rescaling by -1 is the
    lone modulus-one rational exception: even observables (equal
    coefficients at k and -k) are invariant under it, so it is excluded from
    the random draw and verified separately.
    """
    if trials < 1:
        raise MeasureLabError("TOO_FEW_SAMPLES", "need at least one trial")
    basis = SymbolBasis(("u1", "u2"))
    bad = 0
    constants_ok = True
    for t in range(trials):
        gen = rng.child(t).generator()
        psi = _random_poly(gen, basis)
        lam = _random_rational(gen, 9, 5, exclude_unit=True)
        if is_invariant(psi, lam) and not psi.is_constant():
            bad += 1
        const = GlobalTrigPoly({FrequencyVector(basis, (Fraction(0), Fraction(0))): 3.5 + 0j})
        if not is_invariant(const, lam):
            constants_ok = False
    u1 = FrequencyVector(basis, (Fraction(1), Fraction(0)))
    even_pair = GlobalTrigPoly({u1: 0.5 + 0j, scale(u1, -1): 0.5 + 0j})
    exception = is_invariant(even_pair, Fraction(-1)) and not even_pair.is_constant()
    return ErgodicityReport(trials, bad, constants_ok, exception)
