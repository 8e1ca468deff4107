"""The numba and numpy kernel paths must agree to float tolerance."""

import numpy as np
import pytest

from measurelab import _kernels

NEEDS_NUMBA = pytest.mark.skipif(
    "numba" not in _kernels.IMPLEMENTATIONS, reason="numba path disabled or unavailable"
)


def _pair(name):
    return _kernels.IMPLEMENTATIONS["numpy"][name], _kernels.IMPLEMENTATIONS["numba"][name]


@NEEDS_NUMBA
@pytest.mark.parametrize("d", [1, 2, 3])
@pytest.mark.parametrize("expo", [-0.5, -1.3, 0.7])
def test_folded_power_sum_paths_agree(d, expo):
    np_impl, nb_impl = _pair("folded_power_sum")
    gen = np.random.default_rng(d * 100 + 7)
    vals = np.sort(gen.uniform(0.0, 50.0, 33))
    wts = np.where(gen.uniform(size=33) < 0.5, 1.0, 2.0)
    a = np_impl(vals, wts, 1.7, expo, d)
    b = nb_impl(vals, wts, 1.7, expo, d)
    assert b == pytest.approx(a, rel=1e-11)


@NEEDS_NUMBA
def test_prefix_all_count_paths_agree():
    np_impl, nb_impl = _pair("prefix_all_count")
    gen = np.random.default_rng(5)
    inside = gen.uniform(size=(5000, 30)) < 0.8
    assert np.array_equal(np_impl(inside), nb_impl(inside))


@NEEDS_NUMBA
def test_trig_eval_paths_agree():
    np_impl, nb_impl = _pair("trig_eval")
    gen = np.random.default_rng(6)
    coeffs = gen.uniform(-1, 1, 8) + 1j * gen.uniform(-1, 1, 8)
    mvecs = gen.integers(-4, 5, (8, 3)).astype(np.int64)
    thetas = gen.uniform(0, 2 * np.pi, (640, 3))
    a = np_impl(coeffs, mvecs, thetas)
    b = nb_impl(coeffs, mvecs, thetas)
    assert np.max(np.abs(a - b)) < 1e-10


def test_selected_path_matches_env(monkeypatch):
    # the bound names come from one of the two tables
    table = _kernels.IMPLEMENTATIONS["numba" if _kernels.NUMBA_ENABLED else "numpy"]
    assert _kernels.folded_power_sum is table["folded_power_sum"]
    assert _kernels.prefix_all_count is table["prefix_all_count"]
    assert _kernels.trig_eval is table["trig_eval"]
