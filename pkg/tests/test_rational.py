import itertools
from fractions import Fraction

import numpy as np
import pytest

from measurelab import (
    DependentSetError,
    FrequencyVector,
    MeasureLabError,
    RngState,
    SymbolBasis,
    decompose,
    frequency,
    integer_relation,
    make_independent_set,
    rank_over_Q,
    refinement_matrix,
    scale,
)

B2 = SymbolBasis(("u1", "u2"))
B3 = SymbolBasis(("u1", "u2", "u3"))


def u(i, basis=B3):
    return frequency(basis, *[1 if j == i else 0 for j in range(basis.size)])


class TestRank:
    def test_two_independent(self):
        assert rank_over_Q([u(0), u(1)]) == 2

    def test_colinear_pair(self):
        assert rank_over_Q([u(0), scale(u(0), 2)]) == 1

    def test_three_vectors_rank_two(self):
        assert rank_over_Q([u(0) + u(1), u(0) - u(1), u(0)]) == 2
        # the oracle search confirms via an explicit small relation
        assert integer_relation([u(0) + u(1), u(0) - u(1), u(0)], 3) is not None

    def test_mixed_bases_rejected(self):
        with pytest.raises(MeasureLabError) as e:
            rank_over_Q([u(0), frequency(B2, 1, 0)])
        assert e.value.code == "BASIS_MISMATCH"

    def test_fractional_coordinates(self):
        assert rank_over_Q([frequency(B2, "1/2", 0), frequency(B2, 0, "1/3")]) == 2
        # (3/2, 1) is exactly 3 * (1/2, 1/3); (3/2, 2) is not a rational multiple
        assert rank_over_Q([frequency(B2, "1/2", "1/3"), frequency(B2, "3/2", "1/1")]) == 1
        assert rank_over_Q([frequency(B2, "1/2", "1/3"), frequency(B2, "3/2", "2/1")]) == 2


class TestIndependentSet:
    def test_fractional_generators_accepted(self):
        got = make_independent_set([
            frequency(B3, "1/2", 0, 0), frequency(B3, 0, "1/3", 0), u(2),
        ])
        assert got.size == 3

    def test_dependent_with_witness(self):
        with pytest.raises(DependentSetError) as e:
            make_independent_set([u(0), u(1), u(0) + u(1)])
        witness = e.value.witness
        assert witness is not None
        coeffs = np.array(witness)
        combo = sum((int(c) * np.array([x.coords for x in [u(0), u(1), u(0) + u(1)]][i])
                     for i, c in enumerate(coeffs)), np.zeros(3, dtype=object))
        assert all(v == 0 for v in combo)

    def test_empty_set(self):
        with pytest.raises(MeasureLabError) as e:
            make_independent_set([])
        assert e.value.code == "EMPTY_SET"


class TestDecompose:
    def test_integer_combination(self):
        gamma = make_independent_set([u(0), u(1)])
        k = u(0) + u(0) + u(0) - u(1) - u(1)
        assert list(decompose(k, gamma)) == [3, -2]

    def test_half_generator_not_integral(self):
        gamma = make_independent_set([u(0)])
        with pytest.raises(MeasureLabError) as e:
            decompose(scale(u(0), Fraction(1, 2)), gamma)
        assert e.value.code == "NOT_INTEGRAL"

    def test_outside_span(self):
        gamma = make_independent_set([u(0)])
        with pytest.raises(MeasureLabError) as e:
            decompose(u(1), gamma)
        assert e.value.code == "NOT_IN_SPAN"

    def test_additive_in_k(self):
        # subgroup coordinates add exactly, the integer-level morphism law
        gamma = make_independent_set([u(0) + u(1), u(1) - u(2), u(2)])
        k1 = scale(gamma.gamma[0], 2) + scale(gamma.gamma[2], -1)
        k2 = scale(gamma.gamma[1], 7) + gamma.gamma[0]
        assert np.array_equal(
            decompose(k1 + k2, gamma), decompose(k1, gamma) + decompose(k2, gamma)
        )

    def test_recompose_identity(self):
        gamma = make_independent_set([u(0) + u(1), u(1) - u(2), u(2)])
        k = scale(u(0), 4) + scale(u(2), 3)
        m = decompose(k, gamma)
        acc = None
        for coeff, gen in zip(m, gamma.gamma):
            term = scale(gen, int(coeff)) if coeff != 0 else None
            if term is None:
                continue
            acc = term if acc is None else acc + term
        assert acc == k


class TestRefinement:
    def test_doubling(self):
        gamma = make_independent_set([scale(u(0), 2)])
        gamma_p = make_independent_set([u(0)])
        assert refinement_matrix(gamma, gamma_p).tolist() == [[2]]

    def test_sum_difference(self):
        gamma = make_independent_set([u(0) + u(1), u(0) - u(1)])
        gamma_p = make_independent_set([u(0), u(1)])
        assert refinement_matrix(gamma, gamma_p).tolist() == [[1, 1], [1, -1]]

    def test_not_refinement(self):
        gamma = make_independent_set([scale(u(0), Fraction(1, 2))])
        gamma_p = make_independent_set([u(0)])
        with pytest.raises(MeasureLabError) as e:
            refinement_matrix(gamma, gamma_p)
        assert e.value.code == "NOT_REFINEMENT"

    def test_composition(self):
        finest = make_independent_set([u(0), u(1), u(2)])
        middle = make_independent_set([u(0) + u(1), u(1) + u(2), u(2)])
        coarse = make_independent_set([middle.gamma[0] + middle.gamma[1],
                                       middle.gamma[1] + scale(middle.gamma[2], 2)])
        ab = refinement_matrix(coarse, middle)
        bc = refinement_matrix(middle, finest)
        ac = refinement_matrix(coarse, finest)
        assert np.array_equal(ab @ bc, ac)


class TestScale:
    def test_identity(self):
        k = frequency(B2, "3/4", "-2/3")
        assert scale(k, 1) == k

    def test_two_thirds(self):
        assert scale(frequency(B2, 3, 0), Fraction(2, 3)) == frequency(B2, 2, 0)

    def test_zero_rejected(self):
        with pytest.raises(MeasureLabError) as e:
            scale(u(0), 0)
        assert e.value.code == "ZERO_LAMBDA"

    def test_independence_preserved_100_random_sets(self):
        gen = RngState(31).generator()
        pool = [Fraction(n, d) for n in range(-4, 5) for d in range(1, 5)]
        for trial in range(100):
            while True:
                vecs = [
                    FrequencyVector(B2, (pool[gen.integers(len(pool))], pool[gen.integers(len(pool))]))
                    for _ in range(2)
                ]
                if rank_over_Q(vecs) == 2:
                    break
            lam = Fraction(int(gen.integers(1, 9)), int(gen.integers(1, 7)))
            scaled = [scale(v, lam) for v in vecs]
            assert rank_over_Q(scaled) == 2

    def test_scale_bijection_on_subgroup_coordinates(self):
        gamma = make_independent_set([u(0) + u(1), u(2)])
        lam = Fraction(-3, 2)
        scaled = make_independent_set([scale(g, lam) for g in gamma.gamma])
        k = scale(gamma.gamma[0], 5) + scale(gamma.gamma[1], -2)
        m = decompose(k, gamma)
        m_scaled = decompose(scale(k, lam), scaled)
        assert np.array_equal(m, m_scaled)


class TestBruteForceAgreement:
    def test_small_instances(self):
        # pairs over one symbol and over two symbols with tiny coordinates
        vals = [Fraction(n, d) for n in (-2, -1, 0, 1, 2) for d in (1, 2)]
        vals = sorted(set(vals))
        basis1 = SymbolBasis(("s",))
        for a, b in itertools.combinations(vals, 2):
            vecs = [FrequencyVector(basis1, (a,)), FrequencyVector(basis1, (b,))]
            dependent = rank_over_Q(vecs) < 2
            found = integer_relation(vecs, 5) is not None
            if a == 0 or b == 0:
                assert dependent
            if found:
                assert dependent
            if dependent and not found:
                assert integer_relation(vecs, 20) is not None

    def test_known_escalation_instance(self):
        # minimal relation (1, 1, -7) escapes the |m| <= 5 search
        vecs = [frequency(B2, 3, 4), frequency(B2, 4, 3), frequency(B2, 1, 1)]
        assert rank_over_Q(vecs) == 2
        assert integer_relation(vecs, 5) is None
        assert integer_relation(vecs, 7) in ((1, 1, -7), (-1, -1, 7))
