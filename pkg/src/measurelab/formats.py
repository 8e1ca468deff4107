"""File formats: CSV emission and structured-text frequency/polynomial files.

CSV files open with ``#`` comment lines echoing the command configuration
and seed, then a header row; floats are written with 17 significant digits
so identical runs are byte-identical.  Frequency sets and polynomials are
JSON documents whose rationals are ``"p/q"`` strings, never floats.
"""

from __future__ import annotations

import json
import os
import tempfile
from fractions import Fraction

from .bohr import CylFunction, GlobalTrigPoly
from .errors import MeasureLabError
from .rational import (
    FrequencyVector,
    IndependentSet,
    SymbolBasis,
    _as_fraction,
    make_independent_set,
)
from .scans import ScanResult


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def atomic_write_text(path: str, text: str) -> None:
    """Write via a temp file in the same directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: str, header, rows, comments=()) -> None:
    lines = [f"# {c}" for c in comments]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(x) for x in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def scan_csv_text(result: ScanResult, comments=()) -> str:
    """Data rows (param,size,statistic,stderr) then summary rows per param."""
    lines = [f"# {c}" for c in comments]
    lines.append("param,size,statistic,stderr")
    for param, size, stat, err in result.rows:
        lines.append(f"{_fmt(param)},{_fmt(size)},{_fmt(stat)},{_fmt(err)}")
    lines.append("param,slope,slope_err,verdict")
    for param in result.params():
        fit = result.fits[param]
        lines.append(f"{_fmt(param)},{_fmt(fit.slope)},{_fmt(fit.stderr)},{fit.verdict}")
    return "\n".join(lines) + "\n"


def write_scan_csv(result: ScanResult, path: str, comments=()) -> None:
    atomic_write_text(path, scan_csv_text(result, comments))


# ---------------------------------------------------------------------------
# structured text (JSON) for exact-rational objects
# ---------------------------------------------------------------------------

def _rat_str(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def _vector_payload(v: FrequencyVector) -> list[str]:
    return [_rat_str(c) for c in v.coords]


def _complex_str(c: complex) -> str:
    return f"{format(c.real, '.17g')},{format(c.imag, '.17g')}"


def _parse_complex(s: str) -> complex:
    try:
        re_s, im_s = s.split(",")
        return complex(float(re_s), float(im_s))
    except Exception as exc:
        raise MeasureLabError("BAD_FORMAT", f"bad complex literal {s!r}") from exc


def frequency_set_to_json(gamma: IndependentSet) -> str:
    doc = {
        "basis": list(gamma.basis.names),
        "vectors": [_vector_payload(v) for v in gamma.gamma],
    }
    return json.dumps(doc, indent=2) + "\n"


def vectors_from_json(text: str) -> tuple[SymbolBasis, list[FrequencyVector]]:
    try:
        doc = json.loads(text)
        basis = SymbolBasis(tuple(doc["basis"]))
        vectors = [
            FrequencyVector(basis, tuple(_as_fraction(c) for c in row)) for row in doc["vectors"]
        ]
    except MeasureLabError:
        raise
    except Exception as exc:
        raise MeasureLabError("BAD_FORMAT", f"malformed frequency file: {exc}") from exc
    return basis, vectors


def frequency_set_from_json(text: str) -> IndependentSet:
    _, vectors = vectors_from_json(text)
    return make_independent_set(vectors)


def poly_to_json(psi: GlobalTrigPoly) -> str:
    keys = sorted(psi.terms, key=lambda k: tuple(k.coords))
    basis = keys[0].basis if keys else SymbolBasis(("u1",))
    doc = {
        "basis": list(basis.names),
        "terms": [[_vector_payload(k), _complex_str(psi.terms[k])] for k in keys],
    }
    return json.dumps(doc, indent=2) + "\n"


def poly_from_json(text: str) -> GlobalTrigPoly:
    try:
        doc = json.loads(text)
        basis = SymbolBasis(tuple(doc["basis"]))
        terms = {}
        for key_payload, c_payload in doc["terms"]:
            k = FrequencyVector(basis, tuple(_as_fraction(c) for c in key_payload))
            terms[k] = _parse_complex(c_payload)
    except MeasureLabError:
        raise
    except Exception as exc:
        raise MeasureLabError("BAD_FORMAT", f"malformed polynomial file: {exc}") from exc
    return GlobalTrigPoly(terms)


def cyl_to_json(func: CylFunction) -> str:
    doc = {
        "basis": list(func.gamma.basis.names),
        "gamma": [_vector_payload(v) for v in func.gamma.gamma],
        "terms": [
            [list(m), _complex_str(c)] for m, c in sorted(func.coeffs.items())
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def cyl_from_json(text: str) -> CylFunction:
    try:
        doc = json.loads(text)
        basis = SymbolBasis(tuple(doc["basis"]))
        vectors = [
            FrequencyVector(basis, tuple(_as_fraction(c) for c in row)) for row in doc["gamma"]
        ]
        gamma = make_independent_set(vectors)
        coeffs = {tuple(int(x) for x in m): _parse_complex(c) for m, c in doc["terms"]}
    except MeasureLabError:
        raise
    except Exception as exc:
        raise MeasureLabError("BAD_FORMAT", f"malformed cylindrical-function file: {exc}") from exc
    return CylFunction(gamma, coeffs)
