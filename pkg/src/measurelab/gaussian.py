"""Sampling and exact expectations for the massive free-field Gaussian measure.

The measure is centered with spectral density ``sigma(p) = 1/(2*sqrt(m^2+|p|^2))``
per lattice mode: ``E[fhat(p) fhat(p')^*] = delta_{pp'} L^d sigma(p)``.  Fields
are drawn in momentum space from independent complex Gaussians on a half
grid of modes, conjugate-symmetrized so the position-space sample is real,
then transformed back.  All second-moment quantities are also available as
exact mode sums, which the tests play against the sampler.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import MeasureLabError
from .lattice import Field, LatticeSpec, dft_forward, dft_inverse
from .rng import RngState


@dataclass(frozen=True)
class CovarianceParams:
    """Mass parameter of the covariance (m^2 - Laplacian)^(-1/2) / 2."""

    m: float

    def __post_init__(self):
        if not (self.m > 0.0 and np.isfinite(self.m)):
            raise MeasureLabError("NONPOSITIVE_MASS", f"mass must be > 0, got {self.m}")


def spectral_density(params: CovarianceParams, spec: LatticeSpec) -> np.ndarray:
    """sigma(p) on the full momentum grid."""
    p2 = spec.radius_sq_grid(spec.axis_momenta())
    return 1.0 / (2.0 * np.sqrt(params.m ** 2 + p2))


def _hermitian_unit_noise(spec: LatticeSpec, gen: np.random.Generator) -> np.ndarray:
    """Complex Gaussian mode noise u with u(-p) = conj(u(p)), E|u(p)|^2 = 1.

    Built by conjugate-symmetrizing a full grid of independent standard
    complex Gaussians; self-conjugate modes come out real with unit variance.
    """
    noise = gen.standard_normal((2,) + spec.shape)
    z = (noise[0] + 1j * noise[1]) / np.sqrt(2.0)
    zr = z
    for ax in range(spec.d):
        zr = np.roll(np.flip(zr, axis=ax), 1, axis=ax)  # index n -> -n mod N
    return (z + np.conj(zr)) / np.sqrt(2.0)


def sample_field(params: CovarianceParams, spec: LatticeSpec, rng: RngState) -> Field:
    """Draw one field with exact spectral covariance L^d sigma(p) per mode."""
    u = _hermitian_unit_noise(spec, rng.generator())
    scale = np.sqrt(spec.L ** spec.d * spectral_density(params, spec))
    return dft_inverse(scale * u, spec)


def sample_stack(
    params: CovarianceParams, spec: LatticeSpec, rng: RngState, n: int
) -> np.ndarray:
    """n replica fields as an (n, N^d) array.

    Replica i uses the derived stream ``rng.child(i)``, so the stack equals
    n independent ``sample_field`` calls regardless of batching.
    """
    out = np.empty((n, spec.n_sites))
    scale = np.sqrt(spec.L ** spec.d * spectral_density(params, spec))
    inv_norm = spec.N ** spec.d / spec.L ** spec.d
    signs = np.where(np.arange(spec.N) % 2 == 0, 1.0, -1.0)
    phase = signs
    for _ in range(spec.d - 1):
        phase = np.multiply.outer(phase, signs)
    for i in range(n):
        u = _hermitian_unit_noise(spec, rng.child(i).generator())
        vals = np.fft.ifftn(scale * u * phase) * inv_norm
        out[i] = np.real(vals).ravel()
    return out


def variance_exact(params: CovarianceParams, spec: LatticeSpec) -> float:
    """E[phi(x)^2] = (1/L^d) sum_p sigma(p), the same at every site."""
    return kernel_at_zero(params, spec)


def kernel_at_zero(params: CovarianceParams, spec: LatticeSpec) -> float:
    """C_N(0) by folded mode sum; grows without bound as N increases."""
    vals, wts = spec.folded_momentum_sq()
    s = _kernels.folded_power_sum(vals, wts, params.m ** 2, -0.5, spec.d)
    return 0.5 * s / spec.L ** spec.d


def lattice_kernel(params: CovarianceParams, spec: LatticeSpec) -> Field:
    """Covariance kernel C(x) = (1/L^d) sum_p sigma(p) exp(i p.x) as a field."""
    return dft_inverse(spectral_density(params, spec), spec)


def pair(field: Field, f) -> float:
    """Distributional pairing a^d sum_x f(x) phi(x)."""
    fv = f.values if isinstance(f, Field) else np.asarray(f, dtype=np.float64).ravel()
    if fv.shape != field.values.shape:
        raise MeasureLabError(
            "SIZE_MISMATCH", f"test function shape {fv.shape} != field {field.values.shape}"
        )
    return float(field.spec.a ** field.spec.d * np.sum(fv * field.values))


def covariance_exact(f, g, params: CovarianceParams, spec: LatticeSpec) -> float:
    """Covariance E[phi(f) phi(g)] = (1/L^d) sum_p sigma(p) fhat(p) conj(ghat(p))."""
    ff = f if isinstance(f, Field) else Field(spec, np.asarray(f, dtype=np.float64).ravel())
    gg = g if isinstance(g, Field) else Field(spec, np.asarray(g, dtype=np.float64).ravel())
    if ff.spec != spec or gg.spec != spec:
        raise MeasureLabError("SIZE_MISMATCH", "test functions must live on the given lattice")
    fh = dft_forward(ff)
    gh = dft_forward(gg)
    val = np.sum(spectral_density(params, spec) * fh * np.conj(gh)) / spec.L ** spec.d
    return float(np.real(val))


def hs_momentum_factor(params: CovarianceParams, spec: LatticeSpec, alpha: float) -> float:
    """(1/N^d) sum_p (m^2 + |p|^2)^(-2 alpha)."""
    vals, wts = spec.folded_momentum_sq()
    s = _kernels.folded_power_sum(vals, wts, params.m ** 2, -2.0 * alpha, spec.d)
    return s / spec.N ** spec.d


def hs_envelope_factor(spec: LatticeSpec, alpha: float) -> float:
    """sum_x (1 + |x|^2)^(-2 alpha) over the centered grid."""
    vals, wts = spec.folded_coord_sq()
    return _kernels.folded_power_sum(vals, wts, 1.0, -2.0 * alpha, spec.d)


def hs_frobenius_sq(alpha: float, params: CovarianceParams, spec: LatticeSpec) -> float:
    """Squared Frobenius norm of envelope(multiplier(.)) on the lattice.

    The operator is diagonal in momentum followed by diagonal in position, so
    the norm factorizes into the product of the two grid sums.
    """
    return hs_momentum_factor(params, spec, alpha) * hs_envelope_factor(spec, alpha)
