"""Command-line entry point: ``partial-bergman <subcommand>``.

Results go to stdout as JSON; diagnostics go to stderr through logging.
Exit codes: 0 success, 1 an unexpected verification failure, 2 a
configuration, input or infrastructure error.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

from . import bergman_kernel as bk
from . import model_catalog as mc
from . import radial_geometry as rg
from . import section_norms as sn
from .config import RunConfig, parse_config
from .errors import PartialBergmanError
from .report import INCONCLUSIVE, XFAIL, export_report, run_verification_suite, to_json_text

CONFIG_ENV = "PARTIAL_BERGMAN_CONFIG"

log = logging.getLogger("partial_bergman")


def _emit(doc) -> None:
    sys.stdout.write(to_json_text(doc) + "\n")


def _load_model(path: str) -> mc.ProductModel:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise PartialBergmanError(f"cannot read model file {path}: {exc.strerror}") from None
    try:
        return mc.model_from_json(text)
    except json.JSONDecodeError as exc:
        raise PartialBergmanError(f"model file {path} is not valid JSON: {exc.msg} (line {exc.lineno})") from None


def cmd_norms(args) -> int:
    v = sn.norm(args.m, args.j, args.k, args.method)
    _emit(
        {
            "m": args.m,
            "j": args.j,
            "k": args.k,
            "method": args.method,
            "source": v.source,
            "value": v.approx,
            "exact": None if v.exact is None else str(v.exact),
            "abs_error_bound": v.abs_error_bound,
        }
    )
    return 0


def _evaluation_dict(ev: bk.KernelEvaluation) -> dict:
    return {
        "model": ev.model,
        "m": ev.m,
        "r": ev.r,
        "subspace": ev.subspace,
        "value": ev.value,
        "tail_bound": ev.tail_bound,
        "terms_used": ev.terms_used,
    }


def cmd_kernel(args) -> int:
    model = _load_model(args.model)
    if args.subspace == "full":
        if len(model.factors) != 1 or model.factors[0].kind != mc.DISK:
            raise PartialBergmanError("--subspace full is available for a single punctured-ball factor only")
        f = model.factors[0]
        level = f.base_level(args.m)
        ev = bk.full_kernel(level, args.r, args.tol)
        doc = _evaluation_dict(bk.with_scale(ev, args.m, f.scale))
        doc["base_level"] = level
    else:
        ev = mc.product_kernel_at(model, args.m, args.r, args.tol)
        doc = _evaluation_dict(ev)
        const = mc.expected_constant(model, args.m)
        doc["expected_constant"] = str(const)
        doc["expected_constant_float"] = float(const)
    doc["description"] = model.describe()
    _emit(doc)
    return 0


def cmd_curvature(args) -> int:
    model = _load_model(args.model)
    factors = []
    for f in model.factors:
        entry = {
            "factor": f.describe(),
            "dim": f.dim,
            "scalar_curvature": f.scalar_curvature_at(args.r),
            "expected": float(f.scalar_curvature_over_pi()) * math.pi,
        }
        if args.invariants and f.kind == mc.DISK:
            inv = rg.curvature_invariants(f.potential.scaled(f.scale), args.r)
            entry["invariants"] = {
                "det_H": inv.det_H,
                "riem_sq": inv.riem_sq,
                "ric_sq": inv.ric_sq,
                "riem_sq_minus_4_ric_sq": inv.combo,
            }
        factors.append(entry)
    _emit(
        {
            "r": args.r,
            "description": model.describe(),
            "scalar_curvature": sum(e["scalar_curvature"] for e in factors),
            "expected_over_pi": str(model.scalar_curvature_over_pi()),
            "expected": model.scalar_curvature,
            "factors": factors,
        }
    )
    return 0


def cmd_model(args) -> int:
    model = mc.theorem_instance(args.dim, args.instance)
    doc = model.to_dict()
    doc.update(
        {
            "description": model.describe(),
            "scalar_curvature_over_pi": str(model.scalar_curvature_over_pi()),
            "scalar_curvature": model.scalar_curvature,
            "min_level": model.min_level,
            "kernel_constant_at_min_level": str(mc.expected_constant(model, model.min_level)),
        }
    )
    _emit(doc)
    return 0


def cmd_verify(args) -> int:
    path = args.config or os.environ.get(CONFIG_ENV)
    if path:
        log.info("using config %s", path)
        cfg = parse_config(path)
    else:
        cfg = RunConfig()
    report = run_verification_suite(cfg, workers=args.workers)
    export_report(report, args.format, args.out)
    counts: dict[str, int] = {}
    for c in report.checks:
        counts[c.status] = counts.get(c.status, 0) + 1
        if not c.passed:
            log.warning("%s: %s (%s)", c.check_id, c.status, c.detail)
        elif c.status == XFAIL:
            log.info("%s: expected failure observed", c.check_id)
    _emit({"suite": report.suite, "overall_pass": report.overall_pass, "counts": counts, "out": str(args.out)})
    code = report.exit_code()
    if code == 2:
        log.error("%d check(s) %s", counts.get(INCONCLUSIVE, 0), INCONCLUSIVE)
    return code


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="partial-bergman", description=__doc__.splitlines()[0])
    p.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("norms", help="squared norm of z1^j z2^k at level m")
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--j", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--method", choices=["closed", "exact", "quadrature"], default="closed")
    s.set_defaults(func=cmd_norms)

    s = sub.add_parser("kernel", help="partial Bergman kernel of a model at radius r")
    s.add_argument("--model", required=True, help="model JSON file (see the model subcommand)")
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--r", type=float, required=True)
    s.add_argument("--subspace", choices=["graded", "full"], default="graded")
    s.add_argument("--tol", type=float, default=1e-10)
    s.set_defaults(func=cmd_kernel)

    s = sub.add_parser("curvature", help="scalar curvature of a model at radius r")
    s.add_argument("--model", required=True)
    s.add_argument("--r", type=float, required=True)
    s.add_argument("--invariants", action="store_true", help="add |R|^2, |Ric|^2 for punctured-ball factors")
    s.set_defaults(func=cmd_curvature)

    s = sub.add_parser("model", help="describe a cscK product instance")
    s.add_argument("--instance", choices=["negative", "zero", "positive"], required=True)
    s.add_argument("--dim", type=int, required=True)
    s.set_defaults(func=cmd_model)

    s = sub.add_parser("verify", help="run the verification suite and write a report")
    s.add_argument("--config", help=f"config file (default: ${CONFIG_ENV}, else built-in defaults)")
    s.add_argument("--out", required=True)
    s.add_argument("--format", choices=["json", "csv"], default="json")
    s.add_argument("--workers", type=int, default=4)
    s.set_defaults(func=cmd_verify)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (PartialBergmanError, ValueError, OSError) as exc:
        log.error("%s", exc)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
