"""Command-line front end.

Subcommands wire the exact engine, the simulator, the extractors and the
test suite into file-based experiments. Every run writes a manifest.json
echoing the full effective parameter set (seeds included), so any output can
be regenerated from its manifest alone.

Exit codes: 0 success, 2 usage error, 3 resource budget exceeded, 4
malformed input file.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from pathlib import Path

import numpy as np

from .bitstring import BitString
from .config import DETECTOR_NAMES, QrngConfig
from .errors import InputFormatError, ResourceBudgetError, UsageError
from .exact import (
    ENUMERATION_CAP,
    ExactDistribution,
    tv_distance,
    xor_distribution,
    xor_expectation_classical,
    xor_expectation_quantum,
)
from .extractors import pair_von_neumann, peres, von_neumann, xor_offset
from .fileio import (
    read_bits,
    read_stream_ndjson,
    write_bits,
    write_deviation_csv,
    write_distribution_csv,
    write_json,
    write_reports_csv,
    write_stream_ndjson,
    write_sweep_csv,
)
from .simulate import demon_filter, demon_modulus, run_pipeline
from .stats import (
    DEFAULT_ALPHA,
    borel_normality,
    chi2_uniformity,
    correlation_estimate,
    estimate_theta,
)

__all__ = ["main", "parse_angle", "parse_count"]


def parse_angle(text: str) -> float:
    """Angle in radians from a decimal or a fraction of pi like 'pi/5', '3pi/4'."""
    t = text.strip().lower().replace(" ", "")
    m = re.fullmatch(r"(?:(\d+(?:\.\d*)?|\.\d+)\*?)?pi(?:/(\d+(?:\.\d*)?|\.\d+))?", t)
    if m:
        num = float(m.group(1)) if m.group(1) else 1.0
        den = float(m.group(2)) if m.group(2) else 1.0
        if den == 0.0:
            raise UsageError(f"zero denominator in angle {text!r}")
        return num * math.pi / den
    try:
        return float(t)
    except ValueError:
        raise UsageError(f"cannot parse angle {text!r}") from None


def parse_count(text: str) -> int:
    """Positive integer, scientific notation accepted (1e6)."""
    try:
        value = float(text)
    except ValueError:
        raise UsageError(f"cannot parse count {text!r}") from None
    if value < 1 or value != int(value):
        raise UsageError(f"count must be a positive integer, got {text!r}")
    return int(value)


def _parse_efficiencies(text: str) -> dict:
    parts = text.split(",")
    if len(parts) != 4:
        raise UsageError("--e takes four comma-separated values: e0+,e1+,e0x,e1x")
    try:
        values = [float(p) for p in parts]
    except ValueError:
        raise UsageError(f"cannot parse efficiencies {text!r}") from None
    return dict(zip(DETECTOR_NAMES, values))


def _add_config_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", metavar="FILE", help="JSON file of generator settings; flags override it")
    p.add_argument("--theta", metavar="ANGLE", help="context misalignment, e.g. 0.635 or pi/5")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--e", metavar="Q", help="efficiency quadruple e0+,e1+,e0x,e1x")
    g.add_argument("--equal-e", action="store_true", help="set all four efficiencies to 1")


def _build_config(args, extra: dict | None = None) -> QrngConfig:
    base: dict = {}
    if getattr(args, "config", None):
        try:
            base = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise UsageError(f"cannot read config file: {exc}") from None
        except ValueError as exc:
            raise InputFormatError(f"{args.config}: {exc}") from None
        if not isinstance(base, dict):
            raise InputFormatError(f"{args.config}: expected a JSON object")
    if getattr(args, "theta", None) is not None:
        base["theta"] = parse_angle(args.theta)
    if getattr(args, "e", None) is not None:
        base.update(_parse_efficiencies(args.e))
    if getattr(args, "equal_e", False):
        base.update(dict.fromkeys(DETECTOR_NAMES, 1.0))
    for key, value in (extra or {}).items():
        if value is not None:
            base[key] = value
    return QrngConfig.from_dict(base)


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_manifest(out: Path, command: str, params: dict, results: dict, outputs: list) -> None:
    write_json(
        out / "manifest.json",
        {"command": command, "params": params, "results": results, "outputs": sorted(outputs)},
    )


# --- subcommands -----------------------------------------------------------------


def cmd_exact(args) -> int:
    cfg = _build_config(args)
    out = _out_dir(args)
    dist = xor_distribution(args.n, args.j, cfg, max_bits=args.max_bits)
    tv = tv_distance(dist, ExactDistribution.uniform(args.n))
    write_distribution_csv(out / "distribution.csv", dist)
    write_deviation_csv(out / "deviation.csv", dist)
    _write_manifest(
        out,
        "exact",
        {"n": args.n, "j": args.j, "max_bits": args.max_bits, "config": cfg.to_dict()},
        {"tv_to_uniform": tv, "l1_to_uniform": 2.0 * tv},
        ["distribution.csv", "deviation.csv", "manifest.json"],
    )
    if args.tv:
        print(f"tv_to_uniform {tv!r}")
    print(f"wrote {out / 'distribution.csv'}")
    return 0


def cmd_simulate(args) -> int:
    cfg = _build_config(
        args,
        {
            "mean_pair_interval": args.mean_interval,
            "dead_time_Td": args.dead_time,
            "double_count_prob": args.double_count,
            "demon_rho": args.demon,
        },
    )
    out = _out_dir(args)
    result = run_pipeline(args.pairs, cfg, args.seed, mode=args.mode)
    write_stream_ndjson(out / "stream.ndjson", result.records)
    _write_manifest(
        out,
        "simulate",
        {"pairs": args.pairs, "seed": args.seed, "mode": args.mode, "config": cfg.to_dict()},
        result.counters(),
        ["stream.ndjson", "manifest.json"],
    )
    c = result.counters()
    print(f"kept {c['kept']} of {c['generated']} pairs -> {out / 'stream.ndjson'}")
    return 0


def _extract_inputs(args):
    """Resolve (x, y, z) from the given source flags; unused slots are None."""
    two_sided = args.method in ("xor", "pair-vn")
    if args.stream:
        stream = read_stream_ndjson(args.stream)
        x, y = stream.plus_string(), stream.times_string()
        return (x, y, None) if two_sided else (None, None, xor_offset(x, y, 0))
    if two_sided:
        if not (args.in_x and args.in_y):
            raise UsageError(f"method {args.method} needs --stream or both --in-x and --in-y")
        return read_bits(args.in_x), read_bits(args.in_y), None
    if not args.infile:
        raise UsageError(f"method {args.method} needs --in or --stream")
    return None, None, read_bits(args.infile)


def cmd_extract(args) -> int:
    out = _out_dir(args)
    x, y, z = _extract_inputs(args)
    params: dict = {}
    if args.method == "xor":
        params["j"] = args.j
        bits = xor_offset(x, y, args.j)
        consumed, discarded = len(x), args.j
    elif args.method == "vn":
        result = von_neumann(z)
        bits, consumed, discarded = result.bits, result.consumed, result.discarded
    elif args.method == "peres":
        params["depth"] = args.depth
        result = peres(z, args.depth)
        bits, consumed, discarded = result.bits, result.consumed, result.discarded
    else:
        result = pair_von_neumann(x, y)
        bits, consumed, discarded = result.bits, result.consumed, result.discarded
    write_bits(out / "extracted.bits", bits, mode=args.format)
    summary = {"in": consumed, "out": len(bits), "discarded": discarded,
               "method": args.method, "params": params}
    _write_manifest(
        out,
        "extract",
        {"method": args.method, "format": args.format,
         "inputs": [s for s in (args.stream, args.in_x, args.in_y, args.infile) if s],
         **params},
        summary,
        ["extracted.bits", "manifest.json"],
    )
    print(f"{args.method}: {consumed} positions in, {len(bits)} bits out")
    return 0


def _chi2_blocks(args, n_bits: int) -> list[int]:
    if args.k:
        try:
            ks = sorted({int(p) for p in args.k.split(",")})
        except ValueError:
            raise UsageError(f"cannot parse block list {args.k!r}") from None
        return ks
    return [k for k in range(1, 6) if n_bits >= 100 * (1 << k)]


def cmd_analyze(args) -> int:
    out = _out_dir(args)
    results: dict = {}
    if args.stream:
        stream = read_stream_ndjson(args.stream)
        x, y = stream.plus_string(), stream.times_string()
        bits = xor_offset(x, y, 0)
        results["correlation"] = correlation_estimate(x, y)
        if len(x) >= 10_000:
            results["theta"] = estimate_theta(x, y).to_dict()
    elif args.infile:
        bits = read_bits(args.infile)
    else:
        raise UsageError("analyze needs --in or --stream")
    tests = args.tests.split(",")
    reports = []
    if "chi2" in tests:
        for k in _chi2_blocks(args, len(bits)):
            reports.append(chi2_uniformity(bits, k, alpha=args.alpha))
    if "borel" in tests:
        reports.extend(borel_normality(bits))
    unknown = set(tests) - {"chi2", "borel"}
    if unknown:
        raise UsageError(f"unknown tests: {', '.join(sorted(unknown))}")
    write_json(out / "reports.json", [r.to_dict() for r in reports])
    write_reports_csv(out / "reports.csv", reports)
    _write_manifest(
        out,
        "analyze",
        {"in": args.infile, "stream": args.stream, "tests": args.tests,
         "k": args.k, "alpha": args.alpha, "bits": len(bits)},
        results,
        ["reports.json", "reports.csv", "manifest.json"],
    )
    for r in reports:
        p = "-" if r.p_value is None else f"{r.p_value:.6g}"
        print(f"{r.test_name} k={r.params.get('k')} stat={r.statistic:.6g} "
              f"p={p} {'pass' if r.passed else 'FAIL'}")
    return 0


def _parse_grid(args) -> list[float]:
    if args.thetas:
        return [parse_angle(p) for p in args.thetas.split(",")]
    m = re.fullmatch(r"([^:]+):([^:]+):(\d+)", args.grid or "")
    if not m:
        raise UsageError("sweep needs --thetas or --grid start:stop:count")
    start, stop = parse_angle(m.group(1)), parse_angle(m.group(2))
    count = int(m.group(3))
    if count < 2:
        raise UsageError("grid needs at least two points")
    return list(np.linspace(start, stop, count))


def cmd_sweep(args) -> int:
    out = _out_dir(args)
    thetas = _parse_grid(args)
    cfg = _build_config(args)
    rows = []
    for i, theta in enumerate(thetas):
        row = [theta, xor_expectation_quantum(theta), xor_expectation_classical(theta)]
        if args.empirical:
            cfg_t = QrngConfig.from_dict({**cfg.to_dict(), "theta": theta})
            stream = run_pipeline(args.empirical, cfg_t, args.seed + i).records
            z = stream.a ^ stream.b
            row.append(1.0 - float(z.mean()))
        rows.append(row)
    write_sweep_csv(out / "sweep.csv", rows, with_empirical=bool(args.empirical))
    _write_manifest(
        out,
        "sweep",
        {"thetas": thetas, "empirical": args.empirical, "seed": args.seed,
         "config": cfg.to_dict()},
        {"points": len(rows)},
        ["sweep.csv", "manifest.json"],
    )
    print(f"wrote {out / 'sweep.csv'} ({len(rows)} points)")
    return 0


def cmd_demon_demo(args) -> int:
    out = _out_dir(args)
    rng = np.random.Generator(np.random.Philox(key=args.seed))
    source = BitString.from_array((rng.random(args.n) < 0.5).astype(np.uint8))
    sieved = demon_filter(source, args.rho)
    k = demon_modulus(args.rho)
    forced = sieved.to_array()[k - 1 :: k]
    results = {
        "k": k,
        "in": len(source),
        "out": len(sieved),
        "rejected_fraction": 1.0 - len(sieved) / len(source),
        "forced_slots_all_zero": bool(forced.size == 0 or not forced.any()),
    }
    write_bits(out / "source.bits", source)
    write_bits(out / "sieved.bits", sieved)
    _write_manifest(
        out,
        "demon-demo",
        {"rho": args.rho, "n": args.n, "seed": args.seed},
        results,
        ["source.bits", "sieved.bits", "manifest.json"],
    )
    print(f"k={k}: kept {len(sieved)} of {len(source)} bits "
          f"(rejected {results['rejected_fraction']:.4f})")
    return 0


# --- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qrngkit",
        description="Entangled-pair randomness toolkit: exact laws, simulation, "
        "extraction, and statistical analysis.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exact", help="enumerate the exact offset-XOR output law")
    p.add_argument("--n", type=parse_count, required=True, help="output string length")
    p.add_argument("--j", type=int, default=0, help="XOR offset (default 0)")
    p.add_argument("--max-bits", type=int, default=ENUMERATION_CAP,
                   help=f"enumeration budget on n+j (default {ENUMERATION_CAP})")
    p.add_argument("--tv", action="store_true", help="print the distance to uniform")
    _add_config_flags(p)
    p.add_argument("--out-dir", default=".", help="output directory")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("simulate", help="generate a pair stream")
    p.add_argument("--pairs", type=parse_count, required=True, help="raw pairs to draw")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=("ideal", "physical"), default="ideal")
    p.add_argument("--mean-interval", type=float, default=None, help="mean seconds between pairs")
    p.add_argument("--dead-time", type=float, default=None, help="detector dead time in seconds")
    p.add_argument("--double-count", type=float, default=None, help="double-count probability")
    p.add_argument("--demon", type=float, default=None, metavar="RHO",
                   help="apply the fair-sampling demon with budget RHO")
    _add_config_flags(p)
    p.add_argument("--out-dir", default=".", help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("extract", help="post-process bit files or a stream")
    p.add_argument("--method", choices=("xor", "vn", "peres", "pair-vn"), required=True)
    p.add_argument("--in", dest="infile", help="input bit file (vn, peres)")
    p.add_argument("--in-x", help="first input bit file (xor, pair-vn)")
    p.add_argument("--in-y", help="second input bit file (xor, pair-vn)")
    p.add_argument("--stream", help="NDJSON stream as input instead of bit files")
    p.add_argument("--j", type=int, default=0, help="offset for method xor")
    p.add_argument("--depth", type=int, default=4, help="recursion depth for method peres")
    p.add_argument("--format", choices=("ascii", "packed"), default="ascii",
                   help="output bit-file mode")
    p.add_argument("--out-dir", default=".", help="output directory")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("analyze", help="run statistical tests over bits")
    p.add_argument("--in", dest="infile", help="input bit file")
    p.add_argument("--stream", help="NDJSON stream; tests run on its offset-0 XOR bits")
    p.add_argument("--tests", default="chi2,borel", help="comma list from: chi2, borel")
    p.add_argument("--k", default=None, help="comma list of block lengths for chi2")
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA, help="significance level")
    p.add_argument("--out-dir", default=".", help="output directory")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("sweep", help="tabulate expectation curves over angles")
    p.add_argument("--thetas", help="comma list of angles")
    p.add_argument("--grid", help="angle grid start:stop:count")
    p.add_argument("--empirical", type=parse_count, default=None, metavar="PAIRS",
                   help="add a simulated column with this many pairs per angle")
    p.add_argument("--seed", type=int, default=0)
    _add_config_flags(p)
    p.add_argument("--out-dir", default=".", help="output directory")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("demon-demo", help="show the fair-sampling demon on coin flips")
    p.add_argument("--rho", type=float, default=0.5)
    p.add_argument("--n", type=parse_count, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default=".", help="output directory")
    p.set_defaults(func=cmd_demon_demo)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ResourceBudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except InputFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
