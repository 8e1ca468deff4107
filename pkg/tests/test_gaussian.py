import math

import numpy as np
import pytest

from measurelab import (
    CovarianceParams,
    Field,
    MeasureLabError,
    RngState,
    covariance_exact,
    hs_frobenius_sq,
    kernel_at_zero,
    lattice_kernel,
    make_lattice,
    momentum,
    pair,
    sample_field,
    sample_stack,
    variance_exact,
)

SPEC = make_lattice(1, 64, 16.0)
PARAMS = CovarianceParams(1.0)
REPLICAS = 10_000


@pytest.fixture(scope="module")
def stack():
    return sample_stack(PARAMS, SPEC, RngState(424242), REPLICAS)


class TestSampler:
    def test_mass_must_be_positive(self):
        with pytest.raises(MeasureLabError):
            CovarianceParams(0.0)

    def test_mean_zero(self, stack):
        mean = stack.mean(axis=0)
        stderr = stack.std(axis=0, ddof=1) / math.sqrt(REPLICAS)
        assert np.all(np.abs(mean) <= 4.0 * stderr)

    def test_site_variance_matches_mode_sum(self, stack):
        exact = variance_exact(PARAMS, SPEC)
        sample_var = stack[:, 0].var(ddof=1)
        stderr = exact * math.sqrt(2.0 / REPLICAS)
        assert abs(sample_var - exact) <= 3.0 * stderr

    def test_large_mass_variance_limit(self):
        # sigma flattens to 1/(2m) once the mass dwarfs every lattice momentum
        m = 50.0
        spec = make_lattice(1, 64, 16.0)
        exact = variance_exact(CovarianceParams(m), spec)
        flat = 1.0 / (2.0 * m * spec.a)
        p_max = np.pi / spec.a
        assert abs(exact - flat) / flat < p_max ** 2 / (2.0 * m * m)

    def test_gaussian_fourth_moment(self, stack):
        z = stack[:, 5]
        kurt = np.mean(z ** 4) / np.mean(z ** 2) ** 2
        stderr = math.sqrt(24.0 / REPLICAS)
        assert abs(kurt - 3.0) <= 3.0 * stderr

    def test_deterministic_bytes(self):
        a = sample_field(PARAMS, SPEC, RngState(99, (3,)))
        b = sample_field(PARAMS, SPEC, RngState(99, (3,)))
        assert a.values.tobytes() == b.values.tobytes()

    def test_stack_matches_per_replica_streams(self):
        rng = RngState(7)
        stacked = sample_stack(PARAMS, SPEC, rng, 3)
        for i in range(3):
            single = sample_field(PARAMS, SPEC, rng.child(i))
            assert stacked[i].tobytes() == single.values.tobytes()

    def test_sampled_covariance_chi_square(self, stack):
        # 4-site covariance block against kernel differences, 3-sigma chi2 budget
        sites = [0, 8, 16, 24]
        kern = lattice_kernel(PARAMS, SPEC).values
        sub = stack[:, sites]
        emp = (sub.T @ sub) / REPLICAS
        chi2 = 0.0
        terms = 0
        for i in range(4):
            for j in range(i, 4):
                diff = abs(sites[i] - sites[j]) % SPEC.N
                truth = kern[(SPEC.N // 2 + diff) % SPEC.N]
                var = (kern[SPEC.N // 2] ** 2 + truth ** 2) / REPLICAS
                chi2 += (emp[i, j] - truth) ** 2 / var
                terms += 1
        assert chi2 <= terms + 3.0 * math.sqrt(2.0 * terms)


class TestKernel:
    def test_symmetry(self):
        kern = lattice_kernel(PARAMS, SPEC).values
        mirrored = kern[(-np.arange(SPEC.N)) % SPEC.N]
        assert np.max(np.abs(kern - mirrored)) < 1e-12

    def test_folded_zero_value_matches_full_grid(self):
        spec = make_lattice(2, 16, 8.0)
        kern = lattice_kernel(PARAMS, spec).values
        center = (spec.N // 2) * spec.N + spec.N // 2
        assert kernel_at_zero(PARAMS, spec) == pytest.approx(kern[center], rel=1e-12)

    def test_zero_value_increases_with_refinement(self):
        vals = [kernel_at_zero(PARAMS, make_lattice(1, n, 16.0)) for n in (64, 128, 256, 512)]
        assert all(b > a for a, b in zip(vals, vals[1:]))


class TestPairing:
    def test_zero_function(self):
        f = sample_field(PARAMS, SPEC, RngState(1))
        assert pair(f, np.zeros(SPEC.N)) == 0.0

    def test_single_site_indicator(self):
        f = sample_field(PARAMS, SPEC, RngState(2))
        probe = np.zeros(SPEC.N)
        probe[10] = 1.0
        assert pair(f, probe) == pytest.approx(SPEC.a * f.values[10])

    def test_shape_mismatch(self):
        f = sample_field(PARAMS, SPEC, RngState(3))
        with pytest.raises(MeasureLabError):
            pair(f, np.zeros(SPEC.N + 2))

    def test_sampled_pairings_match_exact_covariance(self, stack):
        x = SPEC.axis_coords()
        f = np.cos(momentum(SPEC, [2])[0] * x)
        g = np.cos(momentum(SPEC, [2])[0] * x) + 0.5 * np.sin(momentum(SPEC, [5])[0] * x)
        prods = (SPEC.a * stack @ f) * (SPEC.a * stack @ g)
        exact = covariance_exact(f, g, PARAMS, SPEC)
        stderr = prods.std(ddof=1) / math.sqrt(REPLICAS)
        assert abs(prods.mean() - exact) <= 3.0 * stderr


class TestCovarianceExact:
    def test_single_cosine_mode(self):
        p1 = momentum(SPEC, [3])[0]
        f = np.cos(p1 * SPEC.axis_coords())
        sigma = 1.0 / (2.0 * math.sqrt(1.0 + p1 * p1))
        assert covariance_exact(f, f, PARAMS, SPEC) == pytest.approx(SPEC.L / 2.0 * sigma)

    def test_disjoint_momentum_support(self):
        x = SPEC.axis_coords()
        f = np.cos(momentum(SPEC, [3])[0] * x)
        g = np.cos(momentum(SPEC, [7])[0] * x)
        assert abs(covariance_exact(f, g, PARAMS, SPEC)) < 1e-12

    def test_bilinear_and_symmetric(self):
        rng = np.random.default_rng(11)
        f = rng.normal(size=SPEC.N)
        g = rng.normal(size=SPEC.N)
        h = rng.normal(size=SPEC.N)
        assert covariance_exact(f, g, PARAMS, SPEC) == pytest.approx(
            covariance_exact(g, f, PARAMS, SPEC), rel=1e-12
        )
        assert covariance_exact(2.0 * f + h, g, PARAMS, SPEC) == pytest.approx(
            2.0 * covariance_exact(f, g, PARAMS, SPEC) + covariance_exact(h, g, PARAMS, SPEC),
            rel=1e-10,
        )


class TestHilbertSchmidt:
    def test_dense_matrix_oracle_n4(self):
        spec = make_lattice(1, 4, 2.0)
        for alpha in (0.3, 0.8):
            p = spec.axis_momenta()
            x = spec.axis_coords()
            sym = (1.0 + p * p) ** (-alpha)
            env = (1.0 + x * x) ** (-alpha)
            dense = np.zeros((4, 4))
            for i in range(4):
                for j in range(4):
                    dense[i, j] = env[i] * np.real(np.sum(sym * np.exp(1j * p * (x[i] - x[j])))) / 4
            frob = float(np.sum(dense * dense))
            assert hs_frobenius_sq(alpha, PARAMS, spec) == pytest.approx(frob, rel=1e-8)

    def test_strictly_decreasing_in_alpha(self):
        spec = make_lattice(2, 16, 8.0)
        vals = [hs_frobenius_sq(a, PARAMS, spec) for a in (0.2, 0.4, 0.8, 1.2)]
        assert all(b < a for a, b in zip(vals, vals[1:]))
