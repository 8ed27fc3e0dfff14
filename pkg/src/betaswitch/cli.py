"""Command line interface.

Every command prints either CSV (header row, LF endings) or a JSON envelope
``{command, inputs, precision_bits, results, warnings}``.  Exit codes: 0 ok,
1 library error, 2 usage error, 3 a comparison stayed undecided at the
precision cap, 4 a step or time cap was hit.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import random
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import sympy

from . import classify as cl
from .dynamics import BetaCtx
from .errors import (BetaSwitchError, CapExceeded, DivisionBySignUnknown, KMaxExceeded,
                     NoReturnWithinCap, UnresolvableAtPrecision)
from .glst import birkhoff_average, expected_return_time, glst_verify
from .numeric import (DEFAULT_MAX_BITS, CertReal, _as_coefficients, format_decimal,
                      isolate_root, precision)
from .realizability import realize_exists_omega, realize_fixed_omega
from .return_map import Branch, enumerate_branches, graph_samples

EXIT_OK, EXIT_ERROR, EXIT_USAGE, EXIT_PRECISION, EXIT_CAP = 0, 1, 2, 3, 4

_NAMED = re.compile(r"^(multinacci|alpha|gamma|eta)\((\d+)\)$")
_X = sympy.Symbol("x")


class UsageError(ValueError):
    pass


# --------------------------------------------------------------------------
# Base specifications
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class BetaSpec:
    """How the user named beta.

    ``kind`` is ``rational`` (decimal or p/q, kept exact), ``golden``, one of
    the marker families ``multinacci``/``alpha``/``gamma``/``eta`` with
    index ``k``, or ``poly`` (root of ``coeffs`` inside ``bracket``).
    """

    kind: str
    rational: Fraction | None = None
    k: int | None = None
    coeffs: tuple[Fraction, ...] | None = None
    bracket: tuple[Fraction, Fraction] | None = None

    @classmethod
    def parse(cls, text: str) -> "BetaSpec":
        s = text.strip().lower().replace(" ", "")
        if s in ("golden", "phi"):
            return cls("golden")
        if s == "tribonacci":
            return cls("multinacci", k=2)
        m = _NAMED.match(s)
        if m:
            k = int(m.group(2))
            if k < 1:
                raise UsageError(f"marker index must be >= 1 in {text!r}")
            return cls(m.group(1), k=k)
        if s.startswith("poly:"):
            expr, sep, br = text.strip()[5:].rpartition("@")
            if not sep:
                raise UsageError("poly spec needs '@lo,hi'")
            return cls.from_poly(expr, br)
        try:
            return cls("rational", rational=Fraction(s))
        except (ValueError, ZeroDivisionError):
            raise UsageError(f"cannot parse base {text!r}") from None

    @classmethod
    def from_poly(cls, expr: str, bracket: str) -> "BetaSpec":
        try:
            coeffs = tuple(_as_coefficients(expr))
            lo, hi = (Fraction(v) for v in bracket.strip("[]() ").split(","))
        except (ValueError, TypeError, sympy.SympifyError):
            raise UsageError(f"cannot parse polynomial {expr!r} with bracket {bracket!r}") from None
        return cls("poly", coeffs=coeffs, bracket=(lo, hi))

    def format(self) -> str:
        if self.kind == "rational":
            q = self.rational
            d = q.denominator
            twos = (d & -d).bit_length() - 1
            rest = d >> twos
            fives = 0
            while rest % 5 == 0:
                rest //= 5
                fives += 1
            if rest != 1:
                return f"{q.numerator}/{d}"
            return format_decimal(CertReal(q), max(twos, fives))
        if self.kind == "golden":
            return "golden"
        if self.kind == "poly":
            expr = sum(sympy.Rational(c.numerator, c.denominator) * _X ** i
                       for i, c in enumerate(self.coeffs))
            lo, hi = self.bracket
            return f"poly:{sympy.sstr(expr)}@{lo},{hi}"
        return f"{self.kind}({self.k})"

    def value(self) -> CertReal:
        if self.kind == "rational":
            return CertReal(self.rational)
        if self.kind == "golden":
            return cl.multinacci(1)
        if self.kind == "multinacci":
            return cl.multinacci(self.k)
        if self.kind in ("alpha", "gamma", "eta"):
            return cl.marker(self.kind, self.k)
        return isolate_root(list(self.coeffs), self.bracket)

    def __str__(self):
        return self.format()


def _spec_from_args(args) -> BetaSpec:
    if getattr(args, "poly", None):
        if not args.bracket:
            raise UsageError("--poly needs --bracket lo,hi")
        return BetaSpec.from_poly(args.poly, args.bracket)
    if not args.beta:
        raise UsageError("a base is required (--beta or --poly/--bracket)")
    return BetaSpec.parse(args.beta)


def _ctx(spec: BetaSpec) -> BetaCtx:
    try:
        return BetaCtx.of(spec.value())
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# --------------------------------------------------------------------------
# Formatting
# --------------------------------------------------------------------------


class Out:
    """Numeric formatting shared by the commands."""

    def __init__(self, digits: int, exact: bool, bits: int):
        self.digits = digits
        self.exact = exact
        self.bits = bits

    def num(self, x) -> str:
        return format_decimal(CertReal.of(x), self.digits)

    def enclosure(self, x) -> list[str]:
        enc = CertReal.of(x).enclosure(min(self.bits, 256))
        return [str(enc.lo), str(enc.hi)]

    def put(self, row: dict, name: str, x) -> None:
        row[name] = self.num(x)
        if self.exact:
            row[f"{name}_enclosure"] = self.enclosure(x)

    def branch(self, index: int, b: Branch) -> dict:
        row = {"branch_index": index, "return_time": b.return_time, "word": str(b.word)}
        self.put(row, "dom_lo", b.domain.lo)
        self.put(row, "dom_hi", b.domain.hi)
        row["full"] = b.full
        return row


def _csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (str(v).lower() if isinstance(v, bool) else v)
                         for k, v in row.items()})
    return buf.getvalue()


# --------------------------------------------------------------------------
# Commands; each returns (results, warnings) for one base
# --------------------------------------------------------------------------


def cmd_markers(k_max: int, out: Out):
    if k_max < 1:
        raise UsageError("k_max must be >= 1")
    rows = []
    for k in range(1, k_max + 1):
        row = {"k": k}
        for kind in cl.MarkerKind:
            out.put(row, kind.value, cl.marker(kind, k))
        rows.append(row)
    return rows, []


def cmd_branches(spec: BetaSpec, digit: int, depth: int, out: Out):
    ctx = _ctx(spec)
    rows = [out.branch(i, b) for i, b in enumerate(enumerate_branches(ctx, digit, depth))]
    return rows, []


def cmd_graph(spec: BetaSpec, digit: int, depth: int, pts: int, out: Out):
    if pts < 2:
        raise UsageError("--pts must be >= 2")
    ctx = _ctx(spec)
    rows = []
    for i, (_, samples) in enumerate(graph_samples(ctx, digit, depth, pts)):
        for x, y in samples:
            row: dict = {}
            out.put(row, "x", x)
            out.put(row, "Ux", y)
            row["branch_id"] = i
            rows.append(row)
    return rows, []


def _membership_payload(mv: cl.MVerdict) -> dict:
    return {"verdict": mv.tag, "witness": mv.witness, "depth": mv.depth,
            "word": "".join(map(str, mv.word))}


def _membership_warnings(mv: cl.MVerdict, label: str) -> list[str]:
    if mv.tag == "Unknown":
        return [f"{label}: membership undecided at the precision cap after {mv.depth} steps"]
    if mv.witness == "UnivoquePersists":
        return [f"{label}: no interior hit within {mv.depth} steps; membership not certified"]
    return []


def cmd_classify(spec: BetaSpec, depth: int, out: Out):
    ctx = _ctx(spec)
    regime = cl.classify_beta(ctx.beta)
    k = cl.hop_index(ctx)
    certs: dict = {"hop_index": k}
    if k >= 1:
        hop = cl.check_hop(ctx, k)
        certs.update(jump=hop.jump, closure=hop.closure,
                     crossover=cl.check_crossover(ctx, k))
    mv = cl.m_membership(ctx, depth)
    certs["membership"] = _membership_payload(mv)
    result = {"beta": spec.format(), "regime": regime.tag, "k": regime.k,
              "certificates": certs}
    out.put(result, "beta_value", ctx.beta)
    return result, _membership_warnings(mv, spec.format())


def cmd_membership(spec: BetaSpec, depth: int, out: Out):
    ctx = _ctx(spec)
    mv = cl.m_membership(ctx, depth)
    return {"beta": spec.format(), **_membership_payload(mv)}, _membership_warnings(mv, spec.format())


def cmd_realize(spec: BetaSpec, times: list[int], omega: str | None, cap: int, out: Out):
    ctx = _ctx(spec)
    if omega is None:
        tree = realize_exists_omega(ctx, times, cap)
    else:
        if len(omega) != len(times) or set(omega) - {"0", "1"}:
            raise UsageError("--omega must be a 0/1 word as long as --times")
        tree = realize_fixed_omega(ctx, [int(c) for c in omega], times, cap)
    result: dict = {"beta": spec.format(), "times": times, "omega": omega,
                    "realizable": tree.nonempty}
    wit = tree.witness()
    if wit is not None:
        x, prefix = wit
        enc = x.enclosure(64)
        result["witness_x"] = [out.num(enc.lo), out.num(enc.hi)]
        result["omega_prefix"] = "".join(map(str, prefix))
    else:
        result["witness_x"] = None
        result["omega_prefix"] = None
    result["leaf_count_per_level"] = tree.leaf_counts()
    result["covering_per_level"] = [lv.covering for lv in tree.levels]
    return result, []


def cmd_glst_verify(spec: BetaSpec, digit: int, depth: int, out: Out, table: bool = False):
    ctx = _ctx(spec)
    rep = glst_verify(ctx, digit, depth)
    warnings = []
    if rep.verdict == "ConsistentWithGLST":
        warnings.append(f"{spec.format()}: all branches up to time {depth} are full; "
                        "GLST property not certified")
    if table:
        rows = []
        for i, c in enumerate(rep.classes):
            row = out.branch(i, c.branch)
            row["count"] = c.count
            rows.append(row)
        return rows, warnings
    result: dict = {"beta": spec.format(), "digit": digit, "depth": depth,
                    "all_full": rep.all_full}
    out.put(result, "length_gap", rep.length_gap)
    result["verdict"] = rep.verdict
    w = rep.incomplete_witness
    result["incomplete_branch"] = None if w is None else out.branch(0, w)
    result["branch_count"] = rep.branch_count
    return result, warnings


def cmd_ergodic(spec: BetaSpec, digit: int, depth: int, samples: int, x0: str | None,
                seed: int, out: Out):
    ctx = _ctx(spec)
    est = expected_return_time(ctx, digit, depth)
    result: dict = {"beta": spec.format(), "digit": digit, "depth": depth}
    out.put(result, "value", est.value)
    out.put(result, "tail_bound", est.tail_bound)
    result["exact"] = None if est.exact is None else out.num(est.exact)
    result["certified"] = est.certified
    warnings = [] if est.certified else [f"{spec.format()}: tail bound is an extrapolation"]
    if samples:
        if x0 is None:
            rng = random.Random(seed)
            lo, hi = float(ctx.switch_lo), float(ctx.switch_hi)
            start = CertReal(Fraction(rng.uniform(lo, hi)))
        else:
            start = BetaSpec.parse(x0).value()
        avg = birkhoff_average(ctx, digit, start, samples)
        result["birkhoff"] = {"n": samples, "x0": out.num(start), "seed": seed,
                              "mean": out.num(CertReal(avg))}
    return result, warnings


# --------------------------------------------------------------------------
# Argument parsing and dispatch
# --------------------------------------------------------------------------


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}")


def _digit(text: str) -> int:
    if text not in ("0", "1"):
        raise argparse.ArgumentTypeError("digit must be 0 or 1")
    return int(text)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--bits", type=int, default=DEFAULT_MAX_BITS,
                        help="precision cap in bits (default %(default)s)")
    common.add_argument("--format", choices=("csv", "json"), default=None,
                        help="output format (tables default to csv, reports to json)")
    common.add_argument("--digits", type=int, default=12,
                        help="decimal digits printed (default %(default)s)")
    common.add_argument("--exact", action="store_true",
                        help="also print dyadic enclosure endpoints")

    base = argparse.ArgumentParser(add_help=False)
    base.add_argument("--beta", help="decimal, p/q, golden, tribonacci, multinacci(k), "
                      "alpha(k), gamma(k), eta(k) or poly:EXPR@lo,hi")
    base.add_argument("--poly", help="polynomial in x whose root is beta")
    base.add_argument("--bracket", help="lo,hi isolating the root of --poly")

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--beta-grid", help="semicolon separated bases, results in input order")
    grid.add_argument("--jobs", type=int, default=1, help="worker processes for --beta-grid")

    digit = argparse.ArgumentParser(add_help=False)
    digit.add_argument("--digit", type=_digit, default=0, help="first digit (default 0)")

    p = argparse.ArgumentParser(prog="betaswitch",
                                description="First-return maps of random beta-transformations.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("markers", parents=[common], help="alpha_k, gamma_k, eta_k table")
    s.add_argument("k_max", type=int)

    s = sub.add_parser("branches", parents=[common, base, digit], help="branch table")
    s.add_argument("--depth", type=int, default=12, help="largest return time (default 12)")

    s = sub.add_parser("graph", parents=[common, base, digit], help="graph samples")
    s.add_argument("--depth", type=int, default=8, help="largest return time (default 8)")
    s.add_argument("--pts", type=int, default=2, help="points per branch (default 2)")

    s = sub.add_parser("classify", parents=[common, base, grid], help="regime of beta")
    s.add_argument("beta_pos", nargs="?", metavar="BETA")
    s.add_argument("--depth", type=int, default=cl.DEFAULT_MEMBERSHIP_DEPTH,
                   help="forced-orbit depth for membership (default %(default)s)")

    s = sub.add_parser("membership", parents=[common, base, grid], help="membership in M")
    s.add_argument("--depth", type=int, default=cl.DEFAULT_MEMBERSHIP_DEPTH)

    s = sub.add_parser("realize", parents=[common, base], help="realize return times")
    s.add_argument("--times", type=_int_list, required=True)
    s.add_argument("--omega", help="fixed omega prefix; omitted means any omega")
    s.add_argument("--cap", type=int, default=64, help="largest allowed return time")

    s = sub.add_parser("glst-verify", parents=[common, base, grid, digit], help="GLST check")
    s.add_argument("--depth", type=int, default=20)

    s = sub.add_parser("ergodic", parents=[common, base, digit], help="mean return time")
    s.add_argument("--depth", type=int, default=40)
    s.add_argument("--samples", type=int, default=0, help="Birkhoff average length")
    s.add_argument("--x0", help="start point for the Birkhoff average")
    s.add_argument("--seed", type=int, default=0, help="seed for a random start point")
    return p


_TABLE_COMMANDS = {"markers", "branches", "graph"}


def _single(command: str, spec_text: str | None, opts: dict):
    """Run one command for one base (top level so worker processes can call it)."""
    out = Out(opts["digits"], opts["exact"], opts["bits"])
    spec = BetaSpec.parse(spec_text) if spec_text is not None else opts.get("spec")
    with precision(opts["bits"]):
        if command == "markers":
            return cmd_markers(opts["k_max"], out)
        if command == "branches":
            return cmd_branches(spec, opts["digit"], opts["depth"], out)
        if command == "graph":
            return cmd_graph(spec, opts["digit"], opts["depth"], opts["pts"], out)
        if command == "classify":
            return cmd_classify(spec, opts["depth"], out)
        if command == "membership":
            return cmd_membership(spec, opts["depth"], out)
        if command == "realize":
            return cmd_realize(spec, opts["times"], opts["omega"], opts["cap"], out)
        if command == "glst-verify":
            return cmd_glst_verify(spec, opts["digit"], opts["depth"], out,
                                   table=opts["format"] == "csv")
        if command == "ergodic":
            return cmd_ergodic(spec, opts["digit"], opts["depth"], opts["samples"],
                               opts["x0"], opts["seed"], out)
    raise UsageError(f"unknown command {command!r}")


def _inputs(args) -> dict:
    skip = {"command", "format", "digits", "exact", "bits", "jobs", "beta_pos"}
    return {k: v for k, v in vars(args).items() if k not in skip and v is not None}


def run(argv: list[str] | None = None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "beta_pos", None) and not args.beta:
        args.beta = args.beta_pos
    opts = dict(vars(args))
    fmt = args.format or ("csv" if args.command in _TABLE_COMMANDS else "json")
    opts["format"] = fmt
    try:
        if args.bits < 64:
            raise UsageError("--bits must be >= 64")
        grid_text = getattr(args, "beta_grid", None)
        if grid_text:
            specs = [t for t in grid_text.split(";") if t.strip()]
            for t in specs:
                BetaSpec.parse(t)
            if args.jobs > 1:
                with ProcessPoolExecutor(args.jobs) as pool:
                    pairs = list(pool.map(_single, [args.command] * len(specs), specs,
                                          [opts] * len(specs)))
            else:
                pairs = [_single(args.command, t, opts) for t in specs]
            results = [r for r, _ in pairs]
            warnings = [w for _, ws in pairs for w in ws]
            if fmt == "csv":
                results = [row for r in results for row in (r if isinstance(r, list) else [r])]
        else:
            if args.command != "markers":
                opts["spec"] = _spec_from_args(args)
            results, warnings = _single(args.command, None, opts)
    except UsageError as exc:
        parser.exit(EXIT_USAGE, f"{parser.prog}: error: {exc}\n")
    except (UnresolvableAtPrecision, DivisionBySignUnknown) as exc:
        print(f"{parser.prog}: precision: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except (CapExceeded, NoReturnWithinCap, KMaxExceeded) as exc:
        print(f"{parser.prog}: cap: {exc}", file=sys.stderr)
        return EXIT_CAP
    except BetaSwitchError as exc:
        print(f"{parser.prog}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR

    if fmt == "csv":
        rows = results if isinstance(results, list) else [results]
        stdout.write(_csv([_flatten(r) for r in rows]))
        for w in warnings:
            print(f"warning: {w}", file=sys.stderr)
    else:
        envelope = {"command": args.command, "inputs": _jsonable(_inputs(args)),
                    "precision_bits": args.bits, "results": results, "warnings": warnings}
        stdout.write(json.dumps(envelope, indent=2, ensure_ascii=False) + "\n")
    if any("undecided" in w for w in warnings):
        return EXIT_PRECISION
    return EXIT_OK


def _flatten(row: dict, prefix: str = "") -> dict:
    flat = {}
    for k, v in row.items():
        if isinstance(v, dict):
            flat.update(_flatten(v, f"{prefix}{k}."))
        elif isinstance(v, list):
            flat[f"{prefix}{k}"] = " ".join(map(str, v))
        else:
            flat[f"{prefix}{k}"] = v
    return flat


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (str, int, float, bool)) or v is None:
        return v
    return str(v)


def main() -> None:
    sys.exit(run())
