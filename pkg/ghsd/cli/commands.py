"""
Command-line front end: analysis reports, refinement runs, smoothness
estimation, mask constructions and verification of the example corpus.

Exit codes:
    0  ok
    1  verification facts failed
    2  malformed input or unknown id
    3  analysis or symmetry error
    4  refinement level cap or memory guard exceeded
    5  smoothness iteration did not converge
"""

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence

from dotenv import load_dotenv
from rich.console import Console
from rich.table import Table

from services.analysis import classify
from services.construct import (
    bspline_mask,
    descriptor_from_block,
    existence_pipeline,
    example12_mask,
    symmetry_check,
    symmetry_complete,
    tensor_mask,
    tensor_power,
    vectorize_mask,
    vectorized_type,
)
from services.core import (
    AnalysisError,
    GHSDError,
    HermiteType,
    LevelCapError,
    MaskFile,
    MaskFormatError,
    RegistryError,
    SymmetryBlock,
    SymmetryError,
    VectorData,
    load_mask_file,
    parse_rational,
    parse_vector_data,
    serialize_mask,
)
from services.acceptance import ACCEPTANCE_CHECKS, run_acceptance
from services.polysub import export_refinement, refine
from services.registry import (
    REGISTRY,
    ExampleVerification,
    get_example,
    parse_param_overrides,
    verify_example,
)
from services.smoothness import SR_CAP, convergence_verdict, get_estimator
from services.splines import dump_spline, example12_interpolant, registry_spline

load_dotenv()

console = Console()
log_console = Console(stderr=True)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2
EXIT_ANALYSIS = 3
EXIT_LEVEL_CAP = 4
EXIT_UNCONVERGED = 5

VERIFY_JOBS = int(os.getenv("GHSD_VERIFY_JOBS", "4"))

# Target key for suite-level checks in `verify --all`
ACCEPTANCE = "acceptance"


class ConsoleLogger:
    """Logger that displays steps in the terminal."""

    def __init__(self, verbose: bool = False):
        self.verbose = verbose
        self.steps = []

    def log(self, step: str, details: str = ""):
        """Log a step."""
        self.steps.append((step, details))
        log_console.print(f"  {step}", style="cyan", highlight=False)
        if details:
            log_console.print(f"    {details}", style="dim", highlight=False)

    @property
    def callback(self) -> Optional[Callable[[str], None]]:
        """Library log callback; only wired up with --verbose."""
        return self.log if self.verbose else None

    def table(self, title: str, columns: Sequence[str], rows: Sequence[Sequence[object]]):
        table = Table(title=title)
        for column in columns:
            table.add_column(column)
        for row in rows:
            table.add_row(*(str(x) for x in row))
        console.print(table)


def dump_json(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True)


def emit_json(data, path: Optional[str] = None):
    text = dump_json(data)
    if path:
        with open(path, "w", encoding="utf-8") as f:
            f.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _mark(ok: bool) -> str:
    return "✓" if ok else "❌"


# =========================================================================
# Argument helpers
# =========================================================================

def parse_type_arg(text: str) -> List[tuple]:
    """"0;2" -> [(0,), (2,)]; "0,0;1,0;0,1" -> [(0, 0), (1, 0), (0, 1)]."""
    try:
        return [tuple(int(x) for x in entry.split(",")) for entry in text.split(";")]
    except ValueError as e:
        raise MaskFormatError(f"bad type {text!r}: {e}") from e


def parse_translation_arg(text: str) -> List[tuple]:
    return [tuple(parse_rational(x.strip()) for x in entry.split(",")) for entry in text.split(";")]


def parse_dilation_arg(text: str):
    """"2" -> 2; "2,0;0,1" -> [[2, 0], [0, 1]]."""
    try:
        rows = [[int(x) for x in row.split(",")] for row in text.split(";")]
    except ValueError as e:
        raise MaskFormatError(f"bad dilation {text!r}: {e}") from e
    if len(rows) == 1 and len(rows[0]) == 1:
        return rows[0][0]
    return rows


def load_source(args) -> MaskFile:
    """Mask from a file or from --example with --param overrides."""
    if getattr(args, "example", None):
        record = get_example(args.example)
        mask = record.mask(parse_param_overrides(args.param))
        symmetry = None
        if record.symmetry is not None:
            symmetry = SymmetryBlock(group=record.symmetry[0], center=record.symmetry[1])
        return MaskFile(mask=mask, htype=record.htype, symmetry=symmetry)
    if not getattr(args, "mask_file", None):
        raise MaskFormatError("no mask given: pass a mask file or --example ID")
    loaded = load_mask_file(args.mask_file)
    if loaded.symmetry is not None and loaded.symmetry.representatives:
        descriptor = descriptor_from_block(loaded.symmetry, loaded.htype)
        full = symmetry_complete(loaded.mask.coeffs, descriptor, loaded.mask.multiplicity)
        block = SymmetryBlock(group=loaded.symmetry.group, center=loaded.symmetry.center)
        return MaskFile(mask=full, htype=loaded.htype, symmetry=block)
    return loaded


# =========================================================================
# Commands
# =========================================================================

def cmd_analyze(args, logger: ConsoleLogger) -> int:
    source = load_source(args)
    logger.log("🔍 Analyzing mask", f"d={source.mask.dim}, r={source.mask.multiplicity}")
    report = classify(source.mask, source.htype, args.max_order, logger.callback)
    data = report.to_dict()
    data["type"] = source.htype.to_dict()
    if source.symmetry is not None:
        verdict = symmetry_check(source.mask, source.htype, descriptor_from_block(source.symmetry, source.htype))
        data["symmetry"] = {"group": source.symmetry.group, "ok": verdict.ok, "witness": verdict.witness}

    if args.json:
        emit_json(data, args.out)
        return EXIT_OK
    rows = [
        ("sum rules", report.sr_order),
        ("type Lambda", _mark(report.hermite_type_ok)),
        ("linear-phase moments", report.lpm_order),
        ("interpolatory", _mark(report.interpolatory_ok)),
        ("spectral condition", _mark(report.spectral_ok)),
        ("theta", report.theta if report.theta else "-"),
    ]
    if "symmetry" in data:
        rows.append((f"symmetry {source.symmetry.group}", _mark(data["symmetry"]["ok"])))
    logger.table("Mask analysis", ["check", "result"], rows)
    filt = report.matching_filter
    filter_rows = [
        [",".join(map(str, mu))] + [str(filt.printed(ell, mu)) for ell in range(source.mask.multiplicity)]
        for mu in filt.jet.indices()
    ]
    columns = ["mu"] + [f"v{ell + 1}" for ell in range(source.mask.multiplicity)]
    logger.table("Matching filter (coefficients of (i xi)^mu)", columns, filter_rows)
    for warning in report.warnings:
        logger.log(f"⚠ {warning}")
    if args.out:
        emit_json(data, args.out)
    return EXIT_OK


def cmd_refine(args, logger: ConsoleLogger) -> int:
    source = load_source(args)
    mask, htype = source.mask, source.htype
    if args.data:
        with open(args.data, "r", encoding="utf-8") as f:
            w0 = parse_vector_data(f.read(), mask.dim, mask.multiplicity)
    else:
        if not 1 <= args.delta <= mask.multiplicity:
            raise MaskFormatError(f"--delta must be in 1..{mask.multiplicity}")
        w0 = VectorData.delta(mask.dim, mask.multiplicity, args.delta - 1)
    levels = refine(mask, htype, w0, args.levels, args.max_level, logger.callback)
    table = export_refinement(levels[-1], htype, args.out)
    if args.out:
        logger.log("✅ Refinement written", f"{len(table) - 1} samples -> {args.out}")
    else:
        csv.writer(sys.stdout, lineterminator="\n").writerows(table)
    return EXIT_OK


def cmd_smoothness(args, logger: ConsoleLogger) -> int:
    source = load_source(args)
    estimator = get_estimator(args.tol, args.iters)
    logger.log("📈 Estimating sm_2", f"generators={args.generators}, seed={args.seed}")
    report = estimator.estimate(
        source.mask,
        generators=args.generators,
        seed=args.seed,
        method=args.method,
        log_callback=logger.callback,
    )
    data: Dict[str, object] = {"smoothness": report.to_dict()}
    try:
        verdict = convergence_verdict(source.mask, source.htype, estimator, report, use_rho_inf=not args.no_rho_inf)
        data["convergence"] = verdict.to_dict()
    except AnalysisError as e:
        data["convergence"] = {"verdict": "not applicable", "reason": str(e)}

    if args.json:
        emit_json(data, args.out)
    else:
        convergence = data["convergence"]
        logger.table("Smoothness", ["quantity", "value"], [
            ("sum rules", report.sr_order),
            ("rho_2", f"{report.rho2:.8f}"),
            ("sm_2", f"{report.sm2:.6f}"),
            ("sm_inf >=", f"{report.sminf_lower:.6f}"),
            ("iterations", report.iterations),
            ("method", report.method),
            ("verdict", convergence["verdict"]),
        ] + ([("dense sm_2", f"{report.dense_sm2:.6f}")] if report.dense_sm2 is not None else []))
        for warning in report.warnings:
            logger.log(f"⚠ {warning}")
        if args.out:
            emit_json(data, args.out)
    if not report.converged:
        logger.log("❌ Transfer iteration did not converge", "partial report above")
        return EXIT_UNCONVERGED
    return EXIT_OK


def _write_mask(mask, htype: HermiteType, args, logger: ConsoleLogger, symmetry: Optional[SymmetryBlock] = None):
    text = serialize_mask(mask, htype, symmetry)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(text + "\n")
        logger.log("✅ Mask written", args.out)
    else:
        sys.stdout.write(text + "\n")
    report = classify(mask, htype, args.max_order)
    logger.log(
        "📋 Classification",
        f"sr={report.sr_order}, lpm={report.lpm_order}, type {_mark(report.hermite_type_ok)}, "
        f"interpolatory {_mark(report.interpolatory_ok)}",
    )


def _product_type(a: HermiteType, b: HermiteType) -> HermiteType:
    return HermiteType(
        nus=tuple(nu_a + nu_b for nu_a in a.nus for nu_b in b.nus),
        taus=tuple(t_a + t_b for t_a in a.taus for t_b in b.taus),
    )


def cmd_construct(args, logger: ConsoleLogger) -> int:
    kind = args.kind
    if kind == "bspline":
        mask = tensor_power(bspline_mask(args.n), args.dim)
        _write_mask(mask, HermiteType.scalar(args.dim), args, logger)
    elif kind == "tensor":
        a, b = load_mask_file(args.a), load_mask_file(args.b)
        _write_mask(tensor_mask(a.mask, b.mask), _product_type(a.htype, b.htype), args, logger)
    elif kind == "vectorize":
        a = load_mask_file(args.a)
        dilation = parse_dilation_arg(args.dilation)
        _write_mask(vectorize_mask(a.mask, dilation), vectorized_type(a.htype, dilation), args, logger)
    elif kind == "from-spline":
        mask, htype = example12_mask(args.m, args.N)
        _write_mask(mask, htype, args, logger)
    elif kind == "existence":
        nus = parse_type_arg(args.type)
        if any(len(nu) != args.dim for nu in nus):
            raise MaskFormatError(f"type entries must have length {args.dim}")
        taus = parse_translation_arg(args.translation) if args.translation else ()
        htype = HermiteType(nus=tuple(nus), taus=tuple(taus))
        _write_mask(existence_pipeline(htype, args.max_order), htype, args, logger)
    else:
        raise MaskFormatError(f"unknown construction {kind!r}")
    return EXIT_OK


def _verify_one(args, target) -> ExampleVerification:
    example_id, variant = target
    if example_id == ACCEPTANCE:
        return run_acceptance(variant, smoothness=not args.no_smoothness)
    return verify_example(
        example_id,
        variant=variant,
        overrides=parse_param_overrides(args.param) if args.param else None,
        smoothness=not args.no_smoothness,
    )


def acceptance_targets() -> List[tuple]:
    """Every record, every named variant, then the suite-level checks."""
    targets = []
    for rid, record in REGISTRY.items():
        targets.append((rid, None))
        targets += [(rid, name) for name in record.variants]
    return targets + [(ACCEPTANCE, name) for name in ACCEPTANCE_CHECKS]


def cmd_verify(args, logger: ConsoleLogger) -> int:
    if args.all:
        targets = acceptance_targets()
    elif args.ids:
        targets = [(get_example(rid).id, args.variant) for rid in args.ids]
    else:
        raise RegistryError("pass an example id or --all")

    jobs = max(1, min(args.jobs, len(targets)))
    if jobs == 1:
        results = [_verify_one(args, target) for target in targets]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda target: _verify_one(args, target), targets))

    rows = []
    for result in results:
        label = result.id if result.variant is None else f"{result.id}[{result.variant}]"
        for check in result.checks:
            rows.append((label, check.name, check.to_dict()["expected"], check.to_dict()["got"], _mark(check.ok)))
    summary = {
        "ok": all(result.ok for result in results),
        "examples": [result.to_dict() for result in results],
    }
    if args.json:
        emit_json(summary, args.out)
    else:
        logger.table("Example verification", ["example", "fact", "expected", "got", ""], rows)
        if args.out:
            emit_json(summary, args.out)
    return EXIT_OK if summary["ok"] else EXIT_FAILED


def cmd_list(args, logger: ConsoleLogger) -> int:
    entries = []
    for record in REGISTRY.values():
        entries.append({
            "id": record.id,
            "description": record.description,
            "type": record.htype.to_dict(),
            "params": {name: str(value) for name, value in record.defaults.items()},
            "variants": sorted(record.variants),
            "symmetry": record.symmetry[0] if record.symmetry else None,
            "spline": record.facts.spline,
        })
    if args.json:
        emit_json(entries)
        return EXIT_OK
    logger.table("Example corpus", ["id", "description", "params", "symmetry", "variants"], [
        (
            entry["id"],
            entry["description"],
            ", ".join(f"{k}={v}" for k, v in entry["params"].items()) or "-",
            entry["symmetry"] or "-",
            ", ".join(entry["variants"]) or "-",
        )
        for entry in entries
    ])
    return EXIT_OK


def cmd_spline(args, logger: ConsoleLogger) -> int:
    if args.id:
        params: Dict[str, Fraction] = {}
        if args.id in REGISTRY:
            record = get_example(args.id)
            params = record.resolve(parse_param_overrides(args.param))
        phi = registry_spline(args.id, params)
    elif args.m is not None and args.N is not None:
        phi = example12_interpolant(args.m, args.N)
    else:
        raise RegistryError("pass a spline id or both --m and --N")
    text = dump_spline(phi, args.out)
    if args.out:
        logger.log("✅ Spline written", args.out)
    else:
        sys.stdout.write(text + "\n")
    return EXIT_OK


# =========================================================================
# Parser
# =========================================================================

def _add_source(parser: argparse.ArgumentParser):
    parser.add_argument("mask_file", nargs="?", help="Mask file (JSON)")
    parser.add_argument("--example", help="Registry example id instead of a mask file")
    parser.add_argument("--param", action="append", default=[], help="Parameter override name=p/q (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ghsd",
        description="Generalized Hermite subdivision: analysis, refinement, smoothness and constructions",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Sum rules, type and matching filter of a registry mask
  python scripts/ghsd_cli.py analyze --example ex6.2a

  # Critical L2 smoothness with a parameter override
  python scripts/ghsd_cli.py smoothness --example ex6.2a --param t1=91/1024 --json

  # Basis samples of the Hermite cubic at level 3
  python scripts/ghsd_cli.py construct from-spline --m 1 --N 1 --out cubic.json
  python scripts/ghsd_cli.py refine cubic.json --delta 1 --levels 3 --out cubic.csv

  # Every expected fact of the corpus
  python scripts/ghsd_cli.py verify --all
        """,
    )
    parser.add_argument("--verbose", "-v", action="store_true", help="Show library progress")
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="Sum rules, type, lpm, interpolatory and symmetry report")
    _add_source(analyze)
    analyze.add_argument("--max-order", type=int, default=SR_CAP, help=f"Sum-rule search cap (default: {SR_CAP})")
    analyze.add_argument("--json", action="store_true", help="Print the JSON report only")
    analyze.add_argument("--out", "-o", help="Write the JSON report to this path")
    analyze.set_defaults(handler=cmd_analyze)

    refine_parser = sub.add_parser("refine", help="Run the refinement iteration and export CSV")
    _add_source(refine_parser)
    refine_parser.add_argument("--data", help="Initial data file (JSON)")
    refine_parser.add_argument("--delta", type=int, default=1, help="Start from delta e_i (1-based, default: 1)")
    refine_parser.add_argument("--levels", type=int, default=3, help="Refinement levels (default: 3)")
    refine_parser.add_argument("--max-level", type=int, help="Override the level cap")
    refine_parser.add_argument("--out", "-o", help="CSV output path (default: stdout)")
    refine_parser.set_defaults(handler=cmd_refine)

    smooth = sub.add_parser("smoothness", help="Estimate sm_2 and the convergence verdict")
    _add_source(smooth)
    smooth.add_argument("--iters", type=int, help="Transfer iteration cap")
    smooth.add_argument("--tol", type=float, help="Ratio tolerance")
    smooth.add_argument("--generators", choices=["compact", "normalizer"], default="compact")
    smooth.add_argument("--seed", choices=["each", "combined"], default="each")
    smooth.add_argument("--method", choices=["power", "dense"], default="power")
    smooth.add_argument("--no-rho-inf", action="store_true", help="Skip the sup-norm heuristic")
    smooth.add_argument("--json", action="store_true", help="Print the JSON report only")
    smooth.add_argument("--out", "-o", help="Write the JSON report to this path")
    smooth.set_defaults(handler=cmd_smoothness)

    construct = sub.add_parser("construct", help="Build a mask file")
    construct.add_argument("kind", choices=["bspline", "tensor", "vectorize", "from-spline", "existence"])
    construct.add_argument("--n", type=int, default=4, help="B-spline order")
    construct.add_argument("--dim", type=int, default=1, help="Spatial dimension")
    construct.add_argument("--a", help="First mask file (tensor, vectorize)")
    construct.add_argument("--b", help="Second mask file (tensor)")
    construct.add_argument("--dilation", default="2", help='Dilation "2" or "2,0;0,1"')
    construct.add_argument("--m", type=int, default=1, help="Smoothness index of the spline space")
    construct.add_argument("--N", type=int, default=1, help="Number of copies of {0..m}")
    construct.add_argument("--type", default="0;1", help='Lambda, e.g. "0;2" or "0,0;1,0;0,1"')
    construct.add_argument("--translation", help='T, e.g. "0;1/2" (default: all zero)')
    construct.add_argument("--max-order", type=int, default=SR_CAP, help="Sum-rule search cap")
    construct.add_argument("--out", "-o", help="Mask file output path (default: stdout)")
    construct.set_defaults(handler=cmd_construct)

    verify = sub.add_parser("verify", help="Check expected facts of registry examples")
    verify.add_argument("ids", nargs="*", help="Example ids")
    verify.add_argument("--all", action="store_true",
                        help="Run the acceptance suite: every example, every variant and the suite-level checks")
    verify.add_argument("--variant", help="Named variant of a single example")
    verify.add_argument("--param", action="append", default=[], help="Parameter override name=p/q")
    verify.add_argument("--no-smoothness", action="store_true", help="Skip sm_2 checks")
    verify.add_argument("--jobs", type=int, default=VERIFY_JOBS, help=f"Parallel examples (default: {VERIFY_JOBS})")
    verify.add_argument("--json", action="store_true", help="Print the JSON summary only")
    verify.add_argument("--out", "-o", help="Write the JSON summary to this path")
    verify.set_defaults(handler=cmd_verify)

    list_parser = sub.add_parser("list", help="List the example corpus")
    list_parser.add_argument("--json", action="store_true")
    list_parser.set_defaults(handler=cmd_list)

    spline = sub.add_parser("spline", help="Dump a closed-form basis function as JSON")
    spline.add_argument("id", nargs="?", help="Spline id (ex6.2b, ex6.3b, bspline4, ...)")
    spline.add_argument("--m", type=int)
    spline.add_argument("--N", type=int)
    spline.add_argument("--param", action="append", default=[], help="Parameter override name=p/q")
    spline.add_argument("--out", "-o", help="Output path (default: stdout)")
    spline.set_defaults(handler=cmd_spline)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logger = ConsoleLogger(verbose=args.verbose)
    try:
        return args.handler(args, logger)
    except (MaskFormatError, RegistryError) as e:
        logger.log(f"❌ {e}")
        return EXIT_INPUT
    except LevelCapError as e:
        logger.log(f"❌ {e}")
        return EXIT_LEVEL_CAP
    except SymmetryError as e:
        logger.log(f"❌ {e}", dump_json(e.witness) if e.witness else "")
        return EXIT_ANALYSIS
    except (AnalysisError, GHSDError) as e:
        logger.log(f"❌ {e}")
        return EXIT_ANALYSIS
    except OSError as e:
        logger.log(f"❌ {e}")
        return EXIT_INPUT
