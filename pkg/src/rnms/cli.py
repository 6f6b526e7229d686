"""Command-line interface: ``rnms <command> ...``.

Every command writes CSV (``#``-prefixed header carrying the full run
configuration and tool version, 12 significant digits) or the equivalent JSON.
Exit codes: 0 success, 1 usage error, 2 validation failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from . import __version__
from .algebra import FourierModulePoint, QuadInt
from .diffraction import amplitude_det, moment_recursion, monte_carlo_moments, spectrum_scan
from .entropy import entropy_report
from .geometry import PointSet, deterministic_window, realize, superwindow, window_check
from .induced import empirical_frequencies, induced_matrix, pf_frequencies
from .words import ProbVector, iterate_seed_patch

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION = 0, 1, 2
P_TOLERANCE = 1e-9


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    m: int | None = None
    p: list[str] | None = None
    seed: int | None = None
    params: dict = field(default_factory=dict)
    out: str | None = None
    format: str = "csv"

    def header(self) -> str:
        return json.dumps({"tool": "rnms", "version": __version__, **asdict(self)}, sort_keys=True)


def parse_p(text: str, m: int | None = None) -> ProbVector:
    """Comma-separated probabilities (decimals or fractions), normalised after a 1e-9 sum check."""
    try:
        parts = [Fraction(s.strip()) for s in text.split(",")]
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"malformed --p {text!r}: {exc}") from None
    total = sum(parts)
    if any(q < 0 for q in parts):
        raise UsageError(f"--p entries must be non-negative: {text!r}")
    if abs(total - 1) > P_TOLERANCE:
        raise UsageError(f"--p must sum to 1 within {P_TOLERANCE}, got {float(total)!r}")
    if m is not None and len(parts) != m + 1:
        raise UsageError(f"--p needs m + 1 = {m + 1} entries, got {len(parts)}")
    return ProbVector([q / total for q in parts])


def _p_or_uniform(text: str | None, m: int) -> ProbVector:
    return ProbVector.uniform(m) if text is None else parse_p(text, m)


def parse_k_range(text: str) -> tuple[float, float, float]:
    try:
        lo, hi, step = (float(s) for s in text.split(":"))
    except ValueError:
        raise UsageError(f"--k-range must be lo:hi:step, got {text!r}") from None
    if step <= 0 or hi < lo:
        raise UsageError(f"--k-range needs lo <= hi and step > 0, got {text!r}")
    return lo, hi, step


def parse_k_list(text: str, m: int) -> list[FourierModulePoint]:
    """Fourier module points ``c:d`` meaning (c + d*lambda)/sqrt(m^2+4), comma separated."""
    out = []
    for item in text.split(","):
        try:
            c, d = (int(s) for s in item.split(":"))
        except ValueError:
            raise UsageError(f"--k-list entries are c:d integer pairs, got {item!r}") from None
        out.append(FourierModulePoint(QuadInt(c, d, m)))
    return out


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def _jsonable(x):
    if isinstance(x, float):
        return float(f"{x:.12g}") if math.isfinite(x) else str(x)
    return x


def emit(cfg: RunConfig, columns: list[str], rows: list[tuple], notes: list[str] = (), stream=None) -> None:
    if cfg.format == "json":
        doc = {
            "config": json.loads(cfg.header()),
            "notes": list(notes),
            "columns": columns,
            "rows": [[_jsonable(v) for v in r] for r in rows],
        }
        text = json.dumps(doc, sort_keys=True, indent=1) + "\n"
    else:
        buf = io.StringIO()
        buf.write(f"# {cfg.header()}\n")
        for note in notes:
            buf.write(f"# {note}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for r in rows:
            writer.writerow([_fmt(v) for v in r])
        text = buf.getvalue()
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    else:
        (stream or sys.stdout).write(text)


def _config(args, command: str, params: dict, m=None, p: ProbVector | None = None, seed=None) -> RunConfig:
    return RunConfig(
        command=command,
        m=m,
        p=[str(q) for q in p] if p is not None else None,
        seed=seed,
        params=params,
        out=args.out,
        format=args.format,
    )


def cmd_generate(args) -> int:
    p = _p_or_uniform(args.p, args.m)
    start = tuple(args.start.split("|")) if "|" in args.start else (args.start[0], args.start[1:])
    patch = iterate_seed_patch(args.m, p, args.steps, args.seed, start=start)
    cfg = _config(args, "generate", {"steps": args.steps, "start": args.start}, args.m, p, args.seed)
    emit(cfg, ["left", "right", "length"], [(patch.left, patch.right, len(patch))])
    return EXIT_OK


def cmd_entropy(args) -> int:
    if args.m_max < 1:
        raise UsageError("--m-max must be >= 1")
    rows = []
    for m in range(1, args.m_max + 1):
        rep = entropy_report(m, tol=args.tol)
        rows.append((m, rep.series_value, rep.truncation_order))
    cfg = _config(args, "entropy", {"m_max": args.m_max, "tol": args.tol})
    emit(cfg, ["m", "H_m", "truncation_order"], rows, notes=["log base: natural"])
    return EXIT_OK


def cmd_frequencies(args) -> int:
    p = _p_or_uniform(args.p, args.m)
    if args.method == "pf":
        freqs = pf_frequencies(induced_matrix(args.m, args.ell, p))
    else:
        freqs = empirical_frequencies(args.m, p, args.ell, seed=args.seed, min_length=args.length)
    cfg = _config(
        args, "frequencies", {"ell": args.ell, "method": args.method, "length": args.length}, args.m, p, args.seed
    )
    emit(cfg, ["word", "frequency"], [(w, freqs[w]) for w in freqs])
    return EXIT_OK


PATCH_COLUMNS = ["index", "float_position", "star_position", "rational_part", "lambda_part"]


def cmd_patch(args) -> int:
    p = _p_or_uniform(args.p, args.m)
    ps = realize(iterate_seed_patch(args.m, p, args.steps, args.seed), args.m)
    x, xs = ps.values, ps.star_values
    rows = [(j, float(x[j]), float(xs[j]), int(ps.a[j]), int(ps.b[j])) for j in range(len(ps))]
    cfg = _config(args, "patch", {"steps": args.steps}, args.m, p, args.seed)
    emit(cfg, PATCH_COLUMNS, rows)
    return EXIT_OK


def _read_points(text: str, m: int):
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise UsageError("no points on input")
    reader = csv.DictReader(lines)
    a, b, stars = [], [], []
    for row in reader:
        if row.get("rational_part") not in (None, "") and row.get("lambda_part") not in (None, ""):
            a.append(int(row["rational_part"]))
            b.append(int(row["lambda_part"]))
        elif "star_position" in row:
            stars.append(float(row["star_position"]))
        else:
            raise UsageError("input needs rational_part/lambda_part or star_position columns")
    if a and stars:
        raise UsageError("mixed exact and float rows")
    if a:
        return PointSet(np.array(a, dtype=np.int64), np.array(b, dtype=np.int64), m), None
    return None, stars


def cmd_window_check(args) -> int:
    text = open(args.input).read() if args.input else sys.stdin.read()
    if args.i is None:
        w = superwindow(args.m)
    else:
        w = deterministic_window(args.m, args.i, args.seed_word)
    ps, stars = _read_points(text, args.m)
    if ps is not None:
        rep = window_check(ps, w)
        n, inside, worst, n_out = rep.n_points, rep.all_inside, rep.max_violation, rep.n_outside
    else:
        n = len(stars)
        flags = [w.contains(s) for s in stars]
        n_out = flags.count(False)
        inside = n_out == 0
        worst = max([max(0.0, w.lo_value - s, s - w.hi_value) for s in stars] + [0.0])
    cfg = _config(args, "window-check", {"window": str(w), "i": args.i, "seed_word": args.seed_word}, args.m)
    emit(cfg, ["n_points", "all_inside", "n_outside", "max_violation"], [(n, str(inside).lower(), n_out, worst)])
    return EXIT_OK if inside else EXIT_VALIDATION


def cmd_diffract(args) -> int:
    p = parse_p(args.p, 1)
    lo, hi, step = parse_k_range(args.k_range)
    samples = spectrum_scan(lo, hi, step, args.n, p, args.tol, include_roots=args.include_roots, workers=args.workers)
    cfg = _config(
        args,
        "diffract",
        {"n": args.n, "k_range": args.k_range, "tol": args.tol, "include_roots": args.include_roots},
        1,
        p,
    )
    emit(cfg, ["k", "pp", "ac"], [(s.k, s.pp, s.ac) for s in samples])
    return EXIT_OK


def cmd_diffract_det(args) -> int:
    if not 0 <= args.i <= args.m:
        raise UsageError(f"--i must lie in 0..{args.m}")
    if args.k_list:
        ks = parse_k_list(args.k_list, args.m)
    else:
        r = args.coeff_max
        ks = [FourierModulePoint(QuadInt(c, d, args.m)) for d in range(-r, r + 1) for c in range(-r, r + 1)]
        ks = [k for k in ks if float(k) >= 0]
        ks.sort(key=float)
    rows = []
    for k in ks:
        amp = amplitude_det(args.m, args.i, k, args.seed_word)
        rows.append((k.numerator.a, k.numerator.b, float(k), k.star_value(), amp.real, amp.imag, abs(amp) ** 2))
    cfg = _config(
        args, "diffract-det", {"i": args.i, "k_list": args.k_list, "coeff_max": args.coeff_max, "seed_word": args.seed_word}, args.m
    )
    emit(cfg, ["c", "d", "k", "k_star", "re", "im", "intensity"], rows)
    return EXIT_OK


def cmd_mc_validate(args) -> int:
    p = parse_p(args.p, 1)
    mc = monte_carlo_moments(args.k, args.n, p, args.samples, args.seed)
    ref = moment_recursion(args.k, args.n, p)[-1]
    z_mean = abs(mc.mean - ref.E_n) / mc.stderr if mc.stderr > 0 else (0.0 if mc.mean == ref.E_n else math.inf)
    z_var = (mc.var - ref.V_n) / mc.var_stderr if mc.var_stderr > 0 else (0.0 if abs(mc.var - ref.V_n) < 1e-9 else math.inf)
    ok = z_mean <= args.z_max and abs(z_var) <= args.z_max
    rows = [
        ("mean_re", mc.mean.real, ref.E_n.real, mc.stderr, z_mean),
        ("mean_im", mc.mean.imag, ref.E_n.imag, mc.stderr, z_mean),
        ("var", mc.var, ref.V_n, mc.var_stderr, z_var),
    ]
    cfg = _config(args, "mc-validate", {"k": args.k, "n": args.n, "samples": args.samples, "z_max": args.z_max}, 1, p, args.seed)
    emit(cfg, ["quantity", "monte_carlo", "recursion", "stderr", "z"], rows, notes=[f"agreement: {'pass' if ok else 'fail'}"])
    return EXIT_OK if ok else EXIT_VALIDATION


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rnms", description="Random noble means substitutions: words, entropy, windows, diffraction.")
    parser.add_argument("--version", action="version", version=f"rnms {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--out", default=None, help="output file (default: stdout)")
        sp.add_argument("--format", choices=["csv", "json"], default="csv")
        sp.set_defaults(func=func)
        return sp

    sp = add("generate", cmd_generate, "iterate the random substitution on a two-sided seed")
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--p", default=None, help="p0,...,pm (default uniform)")
    sp.add_argument("--steps", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--start", default="a|a", help="two-sided seed, e.g. a|a or b|a")

    sp = add("entropy", cmd_entropy, "topological entropy H_m for m = 1..m-max")
    sp.add_argument("--m-max", type=int, required=True)
    sp.add_argument("--tol", type=float, default=1e-12)

    sp = add("frequencies", cmd_frequencies, "frequencies of legal words of length ell")
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--ell", type=int, required=True)
    sp.add_argument("--p", default=None)
    sp.add_argument("--method", choices=["pf", "empirical"], default="pf")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--length", type=int, default=10**5, help="minimum patch length for --method empirical")

    sp = add("patch", cmd_patch, "realise a random patch as points with their star images")
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--p", default=None)
    sp.add_argument("--steps", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)

    sp = add("window-check", cmd_window_check, "check that star images of points lie in a window")
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--i", type=int, default=None, help="deterministic branch window (default: the superwindow)")
    sp.add_argument("--seed-word", default=None, help="two-letter seed for i = 0 or i = m")
    sp.add_argument("--input", default=None, help="points CSV (default: stdin)")

    sp = add("diffract", cmd_diffract, "pure point and absolutely continuous diffraction for m = 1")
    sp.add_argument("--p", default="0.5,0.5")
    sp.add_argument("--n", type=int, default=6)
    sp.add_argument("--k-range", default="0:3.5:0.0001")
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument(
        "--include-roots",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="add the points q*lambda, where ac vanishes, to the grid",
    )
    sp.add_argument("--workers", type=int, default=None, help="worker processes (default $RNMS_THREADS or 1)")

    sp = add("diffract-det", cmd_diffract_det, "Bragg amplitudes of a deterministic noble means set")
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--i", type=int, required=True)
    sp.add_argument("--k-list", default=None, help="c:d pairs, k = (c + d*lambda)/sqrt(m^2+4)")
    sp.add_argument("--coeff-max", type=int, default=3, help="without --k-list, all |c|, |d| <= this")
    sp.add_argument("--seed-word", default=None)

    sp = add("mc-validate", cmd_mc_validate, "Monte Carlo moments of X_n(k) against the recursion")
    sp.add_argument("--k", type=float, required=True)
    sp.add_argument("--n", type=int, default=6)
    sp.add_argument("--p", default="0.5,0.5")
    sp.add_argument("--samples", type=int, default=10**5)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--z-max", type=float, default=4.0)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ValueError) as exc:
        print(f"rnms {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
