"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

The public names (``folded_power_sum``, ``prefix_all_count``, ``trig_eval``)
are bound at import time.  Setting the environment variable
``MEASURELAB_NO_NUMBA=1`` before import forces the numpy implementations;
otherwise numba is used when importable.  Both paths are kept importable so
``benchmarks/bench_kernels.py`` and the equivalence tests can compare them
directly.

Kernels are sequential on purpose: outputs must be byte-identical for a
given (config, seed) and parallel reductions would reorder float sums.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLE = os.environ.get("MEASURELAB_NO_NUMBA", "").lower() in ("1", "true", "yes")

if not _DISABLE:
    try:
        from numba import njit

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        NUMBA_ENABLED = False
else:
    NUMBA_ENABLED = False


# ---------------------------------------------------------------------------
# numpy implementations
# ---------------------------------------------------------------------------

def _numpy_folded_power_sum(vals, wts, shift, expo, d):
    """Weighted power sum over a d-fold product grid.

    Computes sum over (iـ1..i_d) of w[i_1]*..*w[i_d] * (shift + v[i_1] + .. + v[i_d])**expo
    where ``vals``/``wts`` describe one folded axis (see lattice.folded_axis_*).
    """
    if d == 1:
        return float(np.sum(wts * (shift + vals) ** expo))
    if d == 2:
        t = shift + vals[:, None] + vals[None, :]
        w = wts[:, None] * wts[None, :]
        return float(np.sum(w * t ** expo))
    t = shift + vals[:, None, None] + vals[None, :, None] + vals[None, None, :]
    w = wts[:, None, None] * wts[None, :, None] * wts[None, None, :]
    return float(np.sum(w * t ** expo))


def _numpy_prefix_all_count(inside):
    """Count samples whose first j entries are all True, for every prefix j.

    ``inside`` is a (samples, depth) boolean array; returns int64[depth].
    """
    return np.logical_and.accumulate(inside, axis=1).sum(axis=0).astype(np.int64)


def _numpy_trig_eval(coeffs, mvecs, thetas):
    """Evaluate sum_t coeffs[t] * exp(i m_t . theta) for each sample row."""
    phases = thetas @ mvecs.T.astype(np.float64)
    return np.exp(1j * phases) @ coeffs


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if NUMBA_ENABLED:

    @njit(cache=True)
    def _numba_folded_power_sum(vals, wts, shift, expo, d):
        n = vals.shape[0]
        total = 0.0
        if d == 1:
            for i in range(n):
                total += wts[i] * (shift + vals[i]) ** expo
        elif d == 2:
            for i in range(n):
                ti = shift + vals[i]
                wi = wts[i]
                for j in range(n):
                    total += wi * wts[j] * (ti + vals[j]) ** expo
        else:
            for i in range(n):
                ti = shift + vals[i]
                wi = wts[i]
                for j in range(n):
                    tj = ti + vals[j]
                    wij = wi * wts[j]
                    for k in range(n):
                        total += wij * wts[k] * (tj + vals[k]) ** expo
        return total

    @njit(cache=True)
    def _numba_prefix_all_count(inside):
        m, depth = inside.shape
        counts = np.zeros(depth, dtype=np.int64)
        for s in range(m):
            for j in range(depth):
                if inside[s, j]:
                    counts[j] += 1
                else:
                    break
        return counts

    @njit(cache=True)
    def _numba_trig_eval(coeffs, mvecs, thetas):
        m = thetas.shape[0]
        nterms = coeffs.shape[0]
        ndim = thetas.shape[1]
        out = np.empty(m, dtype=np.complex128)
        for s in range(m):
            acc = 0.0 + 0.0j
            for t in range(nterms):
                phase = 0.0
                for j in range(ndim):
                    phase += mvecs[t, j] * thetas[s, j]
                acc += coeffs[t] * (np.cos(phase) + 1j * np.sin(phase))
            out[s] = acc
        return out

    folded_power_sum = _numba_folded_power_sum
    prefix_all_count = _numba_prefix_all_count
    trig_eval = _numba_trig_eval
else:
    folded_power_sum = _numpy_folded_power_sum
    prefix_all_count = _numpy_prefix_all_count
    trig_eval = _numpy_trig_eval


IMPLEMENTATIONS = {
    "numpy": {
        "folded_power_sum": _numpy_folded_power_sum,
        "prefix_all_count": _numpy_prefix_all_count,
        "trig_eval": _numpy_trig_eval,
    }
}
if NUMBA_ENABLED:
    IMPLEMENTATIONS["numba"] = {
        "folded_power_sum": _numba_folded_power_sum,
        "prefix_all_count": _numba_prefix_all_count,
        "trig_eval": _numba_trig_eval,
    }
