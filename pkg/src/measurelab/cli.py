"""Command-line front end.

Subcommands::

    kernel          exact covariance kernel as CSV (x coordinates, value)
    sample          one field sample as CSV
    uv-scan         smoothing-exponent threshold scan
    ir-scan         envelope-exponent threshold scan
    hs-scan         operator-norm boundedness scan
    singular-probe  local absolute-mass divergence probe
    bohr independence   rational-independence report for a frequency file
    bohr pushforward    two-route Haar integration on a refinement pair
    bohr zn-probe       exact vs sampled cylinder probabilities
    bohr ergodic-check  invariant-observable search report
    suite           run the full acceptance battery

Flags override values from an optional JSON config file (--config), which
overrides built-in defaults.  Exit codes: 0 success, 1 validation error,
2 acceptance/assertion failure.  Exact quantities (arc measures, scaling
factors, frequencies) are written as 'p/q' rationals, never floats.  The
``MEASURELAB_OUTDIR`` environment variable supplies the directory for
relative output paths.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import acceptance, formats
from .bohr import ArcSet, ergodicity_suite, pushforward_check, zn_probability
from .errors import DependentSetError, MeasureLabError
from .formats import atomic_write_text, write_csv, write_scan_csv
from .gaussian import CovarianceParams, lattice_kernel, sample_field
from .lattice import make_lattice
from .rational import _as_fraction, integer_relation, rank_over_Q
from .rng import RngState
from .scans import hs_scan, ir_scan, signed_measure_probe, uv_scan


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits with code 2
        raise MeasureLabError("BAD_ARGS", message)


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _rational(text: str) -> Fraction:
    return _as_fraction(text)  # strict p/q; float literals rejected


def _out_path(path: str) -> str:
    base = os.environ.get("MEASURELAB_OUTDIR", "")
    if base and not os.path.isabs(path):
        os.makedirs(base, exist_ok=True)
        return os.path.join(base, path)
    return path


# Per-command schema: config-file keys accepted, with parsers for strings.
_SCHEMAS = {
    "kernel": {"d": int, "m": float, "L": float, "N": int, "out": str},
    "sample": {"d": int, "m": float, "L": float, "N": int, "seed": int, "out": str},
    "uv-scan": {"d": int, "m": float, "L": float, "beta": _float_list, "N": _int_list,
                "replicas": int, "seed": int, "out": str},
    "ir-scan": {"d": int, "m": float, "spacing": float, "alpha": _float_list,
                "L": _float_list, "beta": float, "out": str},
    "hs-scan": {"d": int, "m": float, "alpha": _float_list, "N": _int_list,
                "L": _float_list, "out": str},
    "singular-probe": {"d": int, "m": float, "L": float, "N": _int_list, "box": _float_list,
                       "replicas": int, "seed": int, "out": str},
    "independence": {"file": str, "out": str},
    "pushforward": {"gamma": str, "gamma-prime": str, "poly": str, "samples": int,
                    "seed": int, "out": str},
    "zn-probe": {"r": _rational, "n-max": int, "samples": int, "seed": int, "out": str},
    "ergodic-check": {"trials": int, "seed": int, "out": str},
    "suite": {"seed": int},
}


def _merge_config(command: str, args: argparse.Namespace) -> dict:
    schema = _SCHEMAS[command]
    merged = {}
    cfg_path = getattr(args, "config", None)
    if cfg_path:
        try:
            with open(cfg_path) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise MeasureLabError("BAD_CONFIG", f"cannot read config {cfg_path}: {exc}")
        if not isinstance(raw, dict):
            raise MeasureLabError("BAD_CONFIG", "config file must hold a JSON object")
        for key, value in raw.items():
            if key not in schema:
                raise MeasureLabError("BAD_CONFIG", f"unknown config key {key!r} for {command}")
            merged[key] = schema[key](value) if isinstance(value, str) else value
    for key in schema:
        attr = key.replace("-", "_")
        val = getattr(args, attr, None)
        if val is not None:
            merged[key] = val
    missing = [k for k in schema if k not in merged and k not in _OPTIONAL.get(command, ())]
    if missing:
        raise MeasureLabError("BAD_CONFIG", f"{command}: missing required options {missing}")
    return merged


_OPTIONAL = {
    "uv-scan": ("replicas", "seed", "beta", "N", "L"),
    "ir-scan": ("alpha", "L", "spacing", "beta"),
    "hs-scan": ("alpha", "N", "L"),
    "singular-probe": ("box", "N", "L"),
    "independence": ("out",),
    "pushforward": ("out",),
    "zn-probe": ("out",),
    "ergodic-check": ("out",),
    "suite": ("seed",),
}

_DEFAULTS = {
    ("uv-scan", "replicas"): 0,
    ("uv-scan", "seed"): 1,
    ("suite", "seed"): acceptance.DEFAULT_SEED,
}


def _exponent_grid(center: float) -> list[float]:
    return [round(center + off, 4) for off in (-0.1, -0.05, -0.025, 0.0, 0.025, 0.05, 0.1)]


def _fill_scan_defaults(command: str, cfg: dict) -> None:
    """Per-dimension default grids, sized to finish in seconds on a laptop."""
    d = cfg["d"]
    if d not in (1, 2, 3):
        raise MeasureLabError("BAD_DIMENSION", f"dimension must be 1, 2 or 3, got {d}")
    if command == "uv-scan":
        cfg.setdefault("beta", _exponent_grid((d - 1) / 4.0))
        L, Ns = acceptance.UV_CROSS_GRIDS[d]
        cfg.setdefault("L", L)
        cfg.setdefault("N", list(Ns))
    elif command == "ir-scan":
        a, Ls, beta = acceptance.IR_GRIDS[d]
        cfg.setdefault("alpha", _exponent_grid(d / 4.0))
        cfg.setdefault("spacing", a)
        cfg.setdefault("L", list(Ls))
        cfg.setdefault("beta", beta)
    elif command == "hs-scan":
        Ns, Ls = acceptance.HS_GRIDS[d]
        cfg.setdefault("alpha", _exponent_grid(d / 4.0))
        cfg.setdefault("N", list(Ns))
        cfg.setdefault("L", list(Ls))
    elif command == "singular-probe":
        Ns, L, _ = acceptance.SM_GRIDS[d]
        cfg.setdefault("N", list(Ns))
        cfg.setdefault("L", L)


def _threshold_contradiction(result, threshold: float, band: float = 0.05) -> str | None:
    """A verdict on the wrong side of a known threshold, outside the band."""
    from .scans import CONVERGENT, DIVERGENT

    for param in result.params():
        verdict = result.fits[param].verdict
        if param < threshold - band and verdict == CONVERGENT:
            return f"param {param} below threshold {threshold} but verdict CONVERGENT"
        if param > threshold + band and verdict == DIVERGENT:
            return f"param {param} above threshold {threshold} but verdict DIVERGENT"
    return None


def _config_echo(command: str, cfg: dict) -> list[str]:
    # the output path is not semantic config; keeping it out makes runs
    # byte-identical regardless of where they are written
    echo = [f"command: {command}"]
    for key in sorted(cfg):
        if key != "out":
            echo.append(f"{key}: {cfg[key]}")
    return echo


def _coord_columns(spec):
    coords = spec.axis_coords()
    if spec.d == 1:
        return [coords]
    grids = np.meshgrid(*([coords] * spec.d), indexing="ij")
    return [g.ravel() for g in grids]


def _cmd_kernel(cfg) -> int:
    spec = make_lattice(cfg["d"], cfg["N"], cfg["L"])
    kern = lattice_kernel(CovarianceParams(cfg["m"]), spec)
    cols = _coord_columns(spec) + [kern.values]
    header = [f"x{i + 1}" for i in range(spec.d)] + ["value"]
    write_csv(_out_path(cfg["out"]), header, zip(*cols), _config_echo("kernel", cfg))
    return 0


def _cmd_sample(cfg) -> int:
    spec = make_lattice(cfg["d"], cfg["N"], cfg["L"])
    field = sample_field(CovarianceParams(cfg["m"]), spec, RngState(cfg["seed"]))
    cols = _coord_columns(spec) + [field.values]
    header = [f"x{i + 1}" for i in range(spec.d)] + ["value"]
    write_csv(_out_path(cfg["out"]), header,
              zip(*cols), _config_echo("sample", cfg) + [f"seed: {cfg['seed']}"])
    return 0


def _cmd_uv_scan(cfg) -> int:
    _fill_scan_defaults("uv-scan", cfg)
    params = CovarianceParams(cfg["m"])
    spec = make_lattice(cfg["d"], cfg["N"][0], cfg["L"])
    rng = RngState(cfg.get("seed", 1))
    res = uv_scan(params, spec, cfg["beta"], cfg["N"], replicas=cfg.get("replicas", 0), rng=rng)
    write_scan_csv(res, _out_path(cfg["out"]), _config_echo("uv-scan", cfg))
    bad = _threshold_contradiction(res, (cfg["d"] - 1) / 4.0)
    if bad:
        sys.stderr.write(f"threshold contradiction: {bad}\n")
        return 2
    return 0


def _cmd_ir_scan(cfg) -> int:
    _fill_scan_defaults("ir-scan", cfg)
    params = CovarianceParams(cfg["m"])
    res = ir_scan(params, cfg["d"], cfg["spacing"], cfg["alpha"], cfg["L"], cfg["beta"])
    write_scan_csv(res, _out_path(cfg["out"]), _config_echo("ir-scan", cfg))
    bad = _threshold_contradiction(res, cfg["d"] / 4.0)
    if bad:
        sys.stderr.write(f"threshold contradiction: {bad}\n")
        return 2
    return 0


def _cmd_hs_scan(cfg) -> int:
    _fill_scan_defaults("hs-scan", cfg)
    params = CovarianceParams(cfg["m"])
    res = hs_scan(params, cfg["d"], cfg["alpha"], cfg["N"], cfg["L"])
    write_scan_csv(res, _out_path(cfg["out"]), _config_echo("hs-scan", cfg))
    bad = _threshold_contradiction(res, cfg["d"] / 4.0)
    if bad:
        sys.stderr.write(f"threshold contradiction: {bad}\n")
        return 2
    return 0


def _cmd_singular_probe(cfg) -> int:
    _fill_scan_defaults("singular-probe", cfg)
    params = CovarianceParams(cfg["m"])
    spec = make_lattice(cfg["d"], cfg["N"][0], cfg["L"])
    flat = cfg.get("box") or [-1.0, 1.0] * cfg["d"]
    if len(flat) != 2 * cfg["d"]:
        raise MeasureLabError("BAD_CONFIG", "box needs lo,hi per dimension")
    box = tuple((flat[2 * i], flat[2 * i + 1]) for i in range(cfg["d"]))
    res = signed_measure_probe(params, spec, cfg["N"], box,
                               replicas=cfg["replicas"], rng=RngState(cfg["seed"]))
    write_scan_csv(res, _out_path(cfg["out"]), _config_echo("singular-probe", cfg))
    verdict = res.fits[cfg["m"]].verdict
    return 0 if verdict == "DIVERGENT" else 2


def _cmd_independence(cfg) -> int:
    with open(cfg["file"]) as fh:
        _, vectors = formats.vectors_from_json(fh.read())
    rank = rank_over_Q(vectors)
    lines = [f"vectors: {len(vectors)}", f"rank: {rank}"]
    if rank == len(vectors):
        lines.append("independent: yes")
        code = 0
    else:
        lines.append("independent: no")
        witness = integer_relation(vectors, bound=4) if len(vectors) <= 4 else None
        if witness:
            lines.append(f"witness: {witness}")
        code = 0
    text = "\n".join(lines) + "\n"
    if cfg.get("out"):
        atomic_write_text(_out_path(cfg["out"]), text)
    else:
        sys.stdout.write(text)
    return code


def _cmd_pushforward(cfg) -> int:
    with open(cfg["gamma"]) as fh:
        gamma = formats.frequency_set_from_json(fh.read())
    with open(cfg["gamma-prime"]) as fh:
        gamma_prime = formats.frequency_set_from_json(fh.read())
    with open(cfg["poly"]) as fh:
        func = formats.cyl_from_json(fh.read())
    if func.gamma != gamma:
        raise MeasureLabError("GAMMA_MISMATCH", "polynomial must live on --gamma")
    report = pushforward_check(gamma, gamma_prime, func, cfg["samples"], RngState(cfg["seed"]))
    lines = [
        f"exact_direct: {report.exact_direct}",
        f"exact_transported: {report.exact_transported}",
        f"mc_estimate: {report.mc_estimate}",
        f"mc_stderr: {report.mc_stderr}",
        f"exact_match: {report.exact_match}",
        f"mc_within_3sigma: {report.mc_within_3sigma}",
    ]
    text = "\n".join(lines) + "\n"
    if cfg.get("out"):
        atomic_write_text(_out_path(cfg["out"]), text)
    else:
        sys.stdout.write(text)
    return 0 if (report.exact_match and report.mc_within_3sigma) else 2


def _cmd_zn_probe(cfg) -> int:
    rows = zn_probability(ArcSet.from_measure(cfg["r"]), range(0, cfg["n-max"] + 1),
                          cfg["samples"], RngState(cfg["seed"]))
    out_rows = [(r.depth, float(r.exact), r.mc_freq, r.binom_sigma) for r in rows]
    comments = _config_echo("zn-probe", cfg) + [f"exact r: {cfg['r']}"]
    if cfg.get("out"):
        write_csv(_out_path(cfg["out"]), ["N", "exact", "mc_freq", "binom_sigma"],
                  out_rows, comments)
    else:
        for row in out_rows:
            sys.stdout.write(",".join(str(x) for x in row) + "\n")
    return 0 if all(r.within_3sigma for r in rows) else 2


def _cmd_ergodic_check(cfg) -> int:
    report = ergodicity_suite(cfg["trials"], RngState(cfg["seed"]))
    lines = [
        f"trials: {report.trials}",
        f"invariant_nonconstant: {report.invariant_nonconstant}",
        f"constants_all_invariant: {report.constants_all_invariant}",
        f"minus_one_exception_holds: {report.minus_one_exception_holds}",
    ]
    text = "\n".join(lines) + "\n"
    if cfg.get("out"):
        atomic_write_text(_out_path(cfg["out"]), text)
    else:
        sys.stdout.write(text)
    ok = (report.invariant_nonconstant == 0 and report.constants_all_invariant
          and report.minus_one_exception_holds)
    return 0 if ok else 2


def _cmd_suite(cfg) -> int:
    results = acceptance.run_all(cfg.get("seed", acceptance.DEFAULT_SEED))
    all_pass = True
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        sys.stdout.write(
            f"[{status}] criterion {res.criterion}: {res.name} ({res.seconds:.1f}s) - {res.detail}\n"
        )
        all_pass &= res.passed
    return 0 if all_pass else 2


def build_parser() -> _Parser:
    parser = _Parser(prog="measurelab", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.add_argument("--config", help="JSON config file; flags take precedence")
        return p

    p = add("kernel", help="covariance kernel CSV")
    p.add_argument("--d", type=int)
    p.add_argument("--m", type=float)
    p.add_argument("--L", type=float)
    p.add_argument("--N", type=int)
    p.add_argument("--out")

    p = add("sample", help="one field sample CSV")
    p.add_argument("--d", type=int)
    p.add_argument("--m", type=float)
    p.add_argument("--L", type=float)
    p.add_argument("--N", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")

    p = add("uv-scan", help="smoothing-threshold scan")
    p.add_argument("--d", type=int)
    p.add_argument("--m", type=float)
    p.add_argument("--L", type=float)
    p.add_argument("--beta", type=_float_list)
    p.add_argument("--N", type=_int_list)
    p.add_argument("--replicas", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")

    p = add("ir-scan", help="envelope-threshold scan")
    p.add_argument("--d", type=int)
    p.add_argument("--m", type=float)
    p.add_argument("--spacing", type=float)
    p.add_argument("--alpha", type=_float_list)
    p.add_argument("--L", type=_float_list)
    p.add_argument("--beta", type=float)
    p.add_argument("--out")

    p = add("hs-scan", help="operator-norm boundedness scan")
    p.add_argument("--d", type=int)
    p.add_argument("--m", type=float)
    p.add_argument("--alpha", type=_float_list)
    p.add_argument("--N", type=_int_list)
    p.add_argument("--L", type=_float_list)
    p.add_argument("--out")

    p = add("singular-probe", help="local absolute-mass divergence probe")
    p.add_argument("--d", type=int)
    p.add_argument("--m", type=float)
    p.add_argument("--L", type=float)
    p.add_argument("--N", type=_int_list)
    p.add_argument("--box", type=_float_list, help="lo,hi per dimension")
    p.add_argument("--replicas", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")

    bohr = sub.add_parser("bohr", help="torus measure commands")
    bohr_sub = bohr.add_subparsers(dest="bohr_command", required=True)

    def add_bohr(name, **kwargs):
        p = bohr_sub.add_parser(name, **kwargs)
        p.add_argument("--config", help="JSON config file; flags take precedence")
        return p

    p = add_bohr("independence", help="rank report for a frequency file")
    p.add_argument("--file")
    p.add_argument("--out")

    p = add_bohr("pushforward", help="two-route integration on a refinement pair")
    p.add_argument("--gamma")
    p.add_argument("--gamma-prime", dest="gamma_prime")
    p.add_argument("--poly")
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")

    p = add_bohr("zn-probe", help="cylinder probabilities, exact vs sampled")
    p.add_argument("--r", type=_rational, help="arc measure as p/q")
    p.add_argument("--n-max", dest="n_max", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")

    p = add_bohr("ergodic-check", help="invariant-observable search")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")

    p = add("suite", help="run the acceptance battery")
    p.add_argument("--seed", type=int)
    return parser


_HANDLERS = {
    "kernel": _cmd_kernel,
    "sample": _cmd_sample,
    "uv-scan": _cmd_uv_scan,
    "ir-scan": _cmd_ir_scan,
    "hs-scan": _cmd_hs_scan,
    "singular-probe": _cmd_singular_probe,
    "independence": _cmd_independence,
    "pushforward": _cmd_pushforward,
    "zn-probe": _cmd_zn_probe,
    "ergodic-check": _cmd_ergodic_check,
    "suite": _cmd_suite,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        command = args.command
        if command == "bohr":
            command = args.bohr_command
        cfg = _merge_config(command, args)
        for (cmd, key), default in _DEFAULTS.items():
            if cmd == command and key not in cfg and default is not None:
                cfg[key] = default
        return _HANDLERS[command](cfg)
    except DependentSetError as exc:
        sys.stderr.write(f"error [{exc.code}]: {exc}\n")
        return 1
    except MeasureLabError as exc:
        sys.stderr.write(f"error [{exc.code}]: {exc}\n")
        return 1
    except OSError as exc:
        sys.stderr.write(f"error [IO]: {exc}\n")
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
