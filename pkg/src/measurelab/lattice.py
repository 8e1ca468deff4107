"""Periodic lattice fields and exact Fourier-multiplier operators.

A field lives on a centered periodic grid in d = 1, 2 or 3 dimensions with
N sites per axis and box length L.  Site coordinates per axis are
``x_j = (j - N/2) * a`` with spacing ``a = L/N``; lattice momenta are
``p_n = (2*pi/L) * nu(n)`` with ``nu(n) = n`` for ``n < N/2`` and ``n - N``
otherwise.  The transform conventions are

    fhat(p) = a^d * sum_x f(x) exp(-i p.x)
    f(x)    = (1/L^d) * sum_p fhat(p) exp(+i p.x)

so that lattice sums converge to their continuum integrals as the grid is
refined and enlarged.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import MeasureLabError


@dataclass(frozen=True)
class LatticeSpec:
    """Geometry of a periodic grid: dimension, sites per axis, box length."""

    d: int
    N: int
    L: float

    @property
    def a(self) -> float:
        """Lattice spacing L/N."""
        return self.L / self.N

    @property
    def n_sites(self) -> int:
        return self.N ** self.d

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.d

    def axis_coords(self) -> np.ndarray:
        """Centered site coordinates along one axis."""
        return (np.arange(self.N) - self.N // 2) * self.a

    def axis_freq_integers(self) -> np.ndarray:
        """Signed mode integers nu(n) along one axis."""
        return np.fft.fftfreq(self.N, d=1.0 / self.N)

    def axis_momenta(self) -> np.ndarray:
        return (2.0 * np.pi / self.L) * self.axis_freq_integers()

    def radius_sq_grid(self, axis_vals: np.ndarray) -> np.ndarray:
        """Broadcast sum of per-axis squared values over the full grid."""
        sq = axis_vals * axis_vals
        if self.d == 1:
            return sq
        if self.d == 2:
            return sq[:, None] + sq[None, :]
        return sq[:, None, None] + sq[None, :, None] + sq[None, None, :]

    def folded_momentum_sq(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-axis p^2 values with multiplicities, folded by p -> -p symmetry.

        Modes nu and -nu carry the same p^2; only nu = 0 and nu = N/2 are
        unpaired.  Returns (values, weights) of length N/2 + 1, to be fed to
        the folded product-grid reductions.
        """
        half = self.N // 2
        nu = np.arange(half + 1, dtype=np.float64)
        p = (2.0 * np.pi / self.L) * nu
        w = np.full(half + 1, 2.0)
        w[0] = 1.0
        w[half] = 1.0
        return p * p, w

    def folded_coord_sq(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-axis x^2 values with multiplicities on the centered chart.

        Sites j and N - j share x^2; j = N/2 (x = 0) and j = 0 (x = -L/2)
        are unpaired.
        """
        half = self.N // 2
        x = self.a * np.arange(half + 1, dtype=np.float64)  # |x| ladder 0..L/2
        w = np.full(half + 1, 2.0)
        w[0] = 1.0
        w[half] = 1.0
        return x * x, w


@dataclass(frozen=True)
class Field:
    """Real field sampled on a lattice, stored flat in row-major order."""

    spec: LatticeSpec
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != (self.spec.n_sites,):
            raise MeasureLabError(
                "SIZE_MISMATCH",
                f"field has {vals.shape} values, lattice needs ({self.spec.n_sites},)",
            )
        if not np.all(np.isfinite(vals)):
            raise MeasureLabError("NONFINITE_VALUE", "field values must be finite")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def as_grid(self) -> np.ndarray:
        return self.values.reshape(self.spec.shape)


@dataclass(frozen=True)
class Multiplier:
    """Fourier multiplier with symbol (m^2 + |p|^2)^s, the fractional resolvent."""

    m: float
    s: float
    kind = "FRACTIONAL_RESOLVENT"

    def __post_init__(self):
        if not (self.m > 0.0 and np.isfinite(self.m)):
            raise MeasureLabError("NONPOSITIVE_MASS", f"mass must be > 0, got {self.m}")
        if not np.isfinite(self.s):
            raise MeasureLabError("BAD_EXPONENT", f"exponent must be finite, got {self.s}")

    def symbol(self, spec: LatticeSpec) -> np.ndarray:
        """Symbol evaluated on the full momentum grid."""
        p2 = spec.radius_sq_grid(spec.axis_momenta())
        return (self.m * self.m + p2) ** self.s


def make_lattice(d: int, N: int, L: float) -> LatticeSpec:
    """Validate and build a lattice spec.

    N must be even and at least 4 so momenta pair off under p -> -p with a
    single self-conjugate mode per axis.
    """
    if d not in (1, 2, 3):
        raise MeasureLabError("BAD_DIMENSION", f"dimension must be 1, 2 or 3, got {d}")
    if N % 2 != 0:
        raise MeasureLabError("ODD_N", f"N must be even, got {N}")
    if N < 4:
        raise MeasureLabError("ODD_N", f"N must be >= 4, got {N}")
    if not (L > 0.0 and np.isfinite(L)):
        raise MeasureLabError("NONPOSITIVE_LENGTH", f"box length must be > 0, got {L}")
    return LatticeSpec(d=d, N=int(N), L=float(L))


def momentum(spec: LatticeSpec, n) -> np.ndarray:
    """Momentum vector of the mode with per-axis indices ``n``."""
    idx = np.atleast_1d(np.asarray(n, dtype=np.int64))
    if idx.shape != (spec.d,):
        raise MeasureLabError(
            "INDEX_OUT_OF_RANGE", f"need {spec.d} indices, got shape {idx.shape}"
        )
    if np.any(idx < 0) or np.any(idx >= spec.N):
        raise MeasureLabError("INDEX_OUT_OF_RANGE", f"indices {idx} outside 0..{spec.N - 1}")
    nu = np.where(idx < spec.N // 2, idx, idx - spec.N)
    return (2.0 * np.pi / spec.L) * nu


def _phase_grid(spec: LatticeSpec) -> np.ndarray:
    # exp(-i p_n x_j) = (-1)^n exp(-2 pi i n j / N) on the centered chart,
    # so the plain FFT needs a (-1)^(n_1+..+n_d) correction.
    signs = np.where(np.arange(spec.N) % 2 == 0, 1.0, -1.0)
    return reduce(np.multiply.outer, [signs] * spec.d) if spec.d > 1 else signs


def dft_forward(field: Field) -> np.ndarray:
    """Transform to momentum space; returns the full complex coefficient grid."""
    spec = field.spec
    out = np.fft.fftn(field.as_grid()) * _phase_grid(spec) * spec.a ** spec.d
    return out


def dft_inverse(coeffs: np.ndarray, spec: LatticeSpec) -> Field:
    """Back-transform coefficients; the imaginary part is discarded.

    Coefficients produced from a real field are conjugate symmetric, so the
    inverse is real up to rounding.
    """
    arr = np.asarray(coeffs)
    if arr.shape != spec.shape:
        raise MeasureLabError(
            "SIZE_MISMATCH", f"coefficient grid {arr.shape} does not match {spec.shape}"
        )
    vals = np.fft.ifftn(arr * _phase_grid(spec)) * (spec.N ** spec.d / spec.L ** spec.d)
    return Field(spec, np.real(vals).ravel())


def apply_multiplier(field: Field, mult: Multiplier) -> Field:
    """Apply the diagonal-in-momentum operator with the multiplier's symbol."""
    coeffs = dft_forward(field) * mult.symbol(field.spec)
    return dft_inverse(coeffs, field.spec)


def apply_envelope(field: Field, alpha: float) -> Field:
    """Multiply pointwise by (1 + |x|^2)^(-alpha) on the centered chart."""
    spec = field.spec
    x2 = spec.radius_sq_grid(spec.axis_coords())
    damped = field.as_grid() * (1.0 + x2) ** (-alpha)
    return Field(spec, damped.ravel())


def l2_norm_sq(field: Field) -> float:
    """Squared lattice L2 norm, a^d * sum_x f(x)^2."""
    return float(field.spec.a ** field.spec.d * np.sum(field.values * field.values))
