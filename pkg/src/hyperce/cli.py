"""Command-line front end: validate -> construct -> verify -> certify, one instance per call.

Exit codes: 0 every requested check passed, 1 a check failed, 2 the input
could not be parsed, 3 a precondition of the construction failed (the report
names the stage).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from ._exact import frac_str
from .catalog import (
    NamedGroup,
    UnknownName,
    catalog_list,
    cyclic_automorphisms,
    get_group,
)
from .expectation import (
    ConditionalExpectation,
    ExpectationError,
    build_automorphism_orbit,
    build_conjugation,
    build_double_coset,
    build_identity,
    generate_automorphism_group,
    verify_expectation_axioms,
    verify_hypergroup_conditions,
)
from .fourier import block_decompose, fourier_submultiplicativity_report, takesaki_cp_certificate
from .groups import GroupError, GroupTable, validate_group
from .hypergroup import (
    HypergroupError,
    HypergroupTable,
    construct_hypergroup,
    haar_solve,
    verify_djs,
    verify_dual_axioms,
)
from .representation import (
    NotCommutative,
    characters,
    left_regular,
    right_regular,
    verify_representation,
)

log = logging.getLogger("hyperce")

ALL_CHECKS = ("djs", "dual", "haar", "representation", "cp", "fourier")

EXIT_OK, EXIT_CHECK, EXIT_PARSE, EXIT_PRECONDITION = 0, 1, 2, 3


class ParseError(ValueError):
    pass


class StageFailed(Exception):
    def __init__(self, stage: str, detail: Any):
        super().__init__(f"{stage}: {detail}")
        self.stage = stage
        self.detail = detail


@dataclass
class InstanceSpec:
    group: Any
    expectation: Any = "id"
    params: dict = field(default_factory=dict)
    checks: tuple[str, ...] = ALL_CHECKS
    seed: int = 0
    output: str | None = None
    samples: int = 256
    tolerance: float = 1e-9

    @classmethod
    def from_dict(cls, doc: dict) -> "InstanceSpec":
        if not isinstance(doc, dict) or "group" not in doc:
            raise ParseError("instance spec needs a 'group' entry")
        checks = tuple(doc.get("checks", ALL_CHECKS))
        unknown = set(checks) - set(ALL_CHECKS)
        if unknown:
            raise ParseError(f"unknown checks {sorted(unknown)}; choose from {ALL_CHECKS}")
        params = doc.get("params") or {}
        if not isinstance(params, dict):
            raise ParseError("params must be a JSON object")
        return cls(
            group=doc["group"],
            expectation=doc.get("expectation", "id"),
            params=params,
            checks=checks,
            seed=int(doc.get("seed", 0)),
            output=doc.get("output"),
            samples=int(doc.get("samples", 256)),
            tolerance=float(doc.get("tolerance", 1e-9)),
        )

    def label(self) -> str:
        g = self.group if isinstance(self.group, str) else f"inline{self.group.get('order', '?')}"
        e = self.expectation if isinstance(self.expectation, str) else "inline"
        return f"{g}/{e}"


# --- loading ---------------------------------------------------------------------

def load_group(spec) -> tuple[GroupTable, NamedGroup | None]:
    if isinstance(spec, str):
        try:
            named = get_group(spec)
        except UnknownName as exc:
            raise ParseError(str(exc)) from None
        return named.table, named
    if isinstance(spec, dict) and "table" in spec:
        if "order" in spec and len(spec["table"]) != int(spec["order"]):
            raise ParseError("'order' does not match the table size")
        try:
            return validate_group(spec["table"]), None
        except GroupError as exc:
            raise StageFailed("validate_group", str(exc)) from None
    raise ParseError("group must be a catalog name or {'order': n, 'table': [[...]]}")


def _elements(named: NamedGroup | None, g: GroupTable, items) -> list[int]:
    out = []
    for x in items:
        if named is not None:
            try:
                out.append(named.index(x))
            except UnknownName as exc:
                raise ParseError(str(exc)) from None
        elif isinstance(x, int) and 0 <= x < g.order:
            out.append(x)
        else:
            raise ParseError(f"element {x!r} is not an index of the inline group")
    return out


def build_expectation(spec, params: dict, g: GroupTable, named: NamedGroup | None) -> ConditionalExpectation:
    try:
        if isinstance(spec, dict):
            return ConditionalExpectation.from_json(g, spec)
        if spec == "id":
            return build_identity(g)
        if spec == "conjugation":
            return build_conjugation(g)
        if spec == "double_coset":
            if "subgroup" not in params:
                raise ParseError("double_coset needs params.subgroup")
            return build_double_coset(g, _elements(named, g, params["subgroup"]))
        if spec == "automorphism_orbit":
            if "autos" in params:
                autos = params["autos"]
            elif "generators" in params:
                autos = generate_automorphism_group(g, params["generators"])
            elif named is not None and named.name.startswith("Z"):
                autos = cyclic_automorphisms(g.order)
            else:
                raise ParseError("automorphism_orbit needs params.autos or params.generators")
            return build_automorphism_orbit(g, autos)
    except (ExpectationError, KeyError, TypeError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise StageFailed("build_expectation", str(exc)) from None
    raise ParseError(f"unknown expectation {spec!r}")


def emit_structure_constants(h: HypergroupTable) -> dict:
    return h.to_json()


def _complex_pairs(arr) -> list:
    arr = np.asarray(arr)
    if arr.dtype == object:
        return np.vectorize(lambda z: frac_str(z) if not isinstance(z, complex) else [z.real, z.imag], otypes=[object])(arr).tolist()
    arr = arr.astype(complex)
    return np.stack([arr.real, arr.imag], axis=-1).tolist()


def reps_document(h: HypergroupTable, seed: int) -> dict:
    doc = {
        "left": [_complex_pairs(L.entries) for L in left_regular(h)],
        "right": [_complex_pairs(R.entries) for R in right_regular(h)],
    }
    try:
        doc["characters"] = [_complex_pairs(chi) for chi in characters(h, seed=seed)]
    except NotCommutative:
        doc["characters"] = None
    return doc


# --- pipeline --------------------------------------------------------------------

def _prepare(spec: InstanceSpec):
    g, named = load_group(spec.group)
    P = build_expectation(spec.expectation, spec.params, g, named)
    rep = verify_expectation_axioms(P, seed=spec.seed)
    if not rep.passed:
        raise StageFailed("verify_expectation_axioms", rep.to_dict())
    rep2 = verify_hypergroup_conditions(P, g)
    if not rep2.passed:
        raise StageFailed("verify_hypergroup_conditions", rep2.to_dict())
    h = construct_hypergroup(P, g, seed=spec.seed)
    return g, P, h, [rep, rep2]


def run_checks(h: HypergroupTable, spec: InstanceSpec) -> tuple[dict, bool]:
    out: dict[str, Any] = {}
    ok = True
    if "djs" in spec.checks:
        r = verify_djs(h)
        out["djs"], ok = r.to_dict(), ok and r.passed
    if "dual" in spec.checks:
        r = verify_dual_axioms(h)
        out["dual"], ok = r.to_dict(), ok and r.passed
    if "haar" in spec.checks:
        try:
            x = haar_solve(h)
            ratios = {h.haar[s] / x[s] for s in h.points}
            passed = len(ratios) == 1
            out["haar"] = {"passed": passed, "solved": [frac_str(v) for v in x],
                           "pushforward": [frac_str(v) for v in h.haar]}
        except HypergroupError as exc:
            passed = False
            out["haar"] = {"passed": False, "error": str(exc)}
        ok = ok and passed
    if "representation" in spec.checks:
        rl = verify_representation(left_regular(h), h)
        rr = verify_representation(right_regular(h), h) if h.modular else None
        norms = [L.op_norm() for L in left_regular(h)]
        contraction = max(norms) <= 1 + 1e-12
        out["representation"] = {
            "left": rl.to_dict(),
            "max_left_op_norm": max(norms),
            "contraction": contraction,
        }
        if rr is not None:
            out["representation"]["right"] = rr.to_dict()
        ok = ok and rl.passed and contraction
    if "cp" in spec.checks:
        cert = takesaki_cp_certificate(h, spec.tolerance)
        out["cp"] = cert.to_dict()
        ok = ok and cert.is_cp
    if "fourier" in spec.checks:
        d = block_decompose(left_regular(h), seed=spec.seed)
        r = fourier_submultiplicativity_report(h, spec.samples, spec.seed, spec.tolerance, d)
        out["fourier"] = r.to_dict()
        out["fourier"]["block_dims"] = list(d.dims)
        ok = ok and r.passed
    return out, ok


def run_pipeline(spec: InstanceSpec) -> tuple[int, dict]:
    report: dict[str, Any] = {"instance": spec.label(), "seed": spec.seed}
    try:
        g, P, h, pre = _prepare(spec)
    except ParseError as exc:
        report.update(status="parse_error", error=str(exc))
        return EXIT_PARSE, report
    except StageFailed as exc:
        report.update(status="precondition_failed", stage=exc.stage, detail=exc.detail)
        return EXIT_PRECONDITION, report
    report["group_order"] = g.order
    report["size"] = h.size
    report["preconditions"] = [r.to_dict() for r in pre]
    report["hypergroup"] = emit_structure_constants(h)
    checks, ok = run_checks(h, spec)
    report["checks"] = checks
    if "cp" in checks:
        report["is_cp"] = checks["cp"]["is_cp"]
        report["min_eigenvalue"] = checks["cp"]["min_eigenvalue"]
    if "fourier" in checks:
        report["worst_submult_ratio"] = checks["fourier"]["meta"]["worst_submult_ratio"]
    report["status"] = "ok" if ok else "check_failed"
    return (EXIT_OK if ok else EXIT_CHECK), report


# --- argparse glue ---------------------------------------------------------------

def _json_arg(text: str | None):
    if text is None:
        return None
    p = Path(text)
    try:
        if p.suffix == ".json" and p.exists():
            return json.loads(p.read_text())
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in {text!r}: {exc}") from None


def _group_arg(text: str):
    if text.lstrip().startswith("{") or text.endswith(".json"):
        return _json_arg(text)
    return text


def _spec_from_args(args, checks=ALL_CHECKS) -> InstanceSpec:
    if getattr(args, "spec", None):
        doc = _json_arg(args.spec)
        if args.seed is not None:
            doc["seed"] = args.seed
        spec = InstanceSpec.from_dict(doc)
    else:
        if not args.group:
            raise ParseError("--group (or --spec) is required")
        expectation = args.expectation or "id"
        if expectation.lstrip().startswith("{") or expectation.endswith(".json"):
            expectation = _json_arg(expectation)
        spec = InstanceSpec(
            group=_group_arg(args.group),
            expectation=expectation,
            params=_json_arg(args.params) or {},
            checks=checks,
            seed=args.seed or 0,
            samples=args.samples,
            tolerance=args.tolerance,
        )
    if checks != ALL_CHECKS:
        spec.checks = checks
    if getattr(args, "out", None):
        spec.output = args.out
    return spec


def _emit(doc: dict, out: str | None) -> None:
    text = json.dumps(doc, indent=2)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _add_instance_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--group", help="catalog name (Z2..Z12, S3, S4, D4, Q8) or JSON table / path")
    p.add_argument("--expectation", help="builder name (id, double_coset, conjugation, automorphism_orbit) or JSON blocks/weights")
    p.add_argument("--params", help="builder parameters as JSON, e.g. '{\"subgroup\": [\"e\", \"(12)\"]}'")
    p.add_argument("--spec", help="full instance spec as JSON or path")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--samples", type=int, default=256)
    p.add_argument("--tolerance", type=float, default=1e-9, help="spectral tolerance only")
    p.add_argument("--out", help="write the JSON report here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hyperce", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("catalog", help="list built-in groups and expectation builders")
    for name, help_ in [
        ("validate", "validate the group and expectation, check the construction hypotheses"),
        ("construct", "emit the hypergroup structure constants"),
        ("verify", "check hypergroup axioms (of a constructed or hand-authored table)"),
        ("reps", "emit left/right regular operators and characters"),
        ("cp-check", "complete-positivity certificate"),
        ("norms", "Fourier-space submultiplicativity report"),
        ("report", "run the full pipeline"),
    ]:
        p = sub.add_parser(name, help=help_)
        _add_instance_args(p)
        if name == "verify":
            p.add_argument("--table", help="hypergroup table JSON (or path) to verify instead of constructing one")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "catalog":
        _emit(catalog_list(), None)
        return EXIT_OK
    try:
        return _dispatch(args)
    except ParseError as exc:
        _emit({"status": "parse_error", "error": str(exc)}, getattr(args, "out", None))
        return EXIT_PARSE


def _dispatch(args) -> int:
    cmd = args.command
    if cmd == "verify" and args.table:
        try:
            h = HypergroupTable.from_json(_json_arg(args.table))
        except (KeyError, ValueError, TypeError) as exc:
            raise ParseError(f"bad hypergroup table: {exc}") from None
        djs, dual = verify_djs(h), verify_dual_axioms(h)
        _emit({"djs": djs.to_dict(), "dual": dual.to_dict()}, args.out)
        return EXIT_OK if djs.passed and dual.passed else EXIT_CHECK

    checks = {
        "report": ALL_CHECKS,
        "verify": ("djs", "dual", "haar"),
        "cp-check": ("cp",),
        "norms": ("fourier",),
    }.get(cmd, ())
    spec = _spec_from_args(args, checks)

    if cmd in ("report", "verify", "cp-check", "norms"):
        code, report = run_pipeline(spec)
        if cmd == "cp-check" and "cp" in report.get("checks", {}):
            report = {"instance": report["instance"], "seed": spec.seed, **report["checks"]["cp"]}
        elif cmd == "norms" and "fourier" in report.get("checks", {}):
            f = report["checks"]["fourier"]
            report = {"instance": report["instance"], "seed": spec.seed,
                      "worst_submult_ratio": f["meta"]["worst_submult_ratio"], **f}
        _emit(report, spec.output)
        return code

    # validate / construct / reps share the precondition stages
    try:
        g, P, h, pre = _prepare(spec)
    except StageFailed as exc:
        _emit({"instance": spec.label(), "status": "precondition_failed", "stage": exc.stage,
               "detail": exc.detail}, spec.output)
        return EXIT_PRECONDITION
    if cmd == "validate":
        doc = {"instance": spec.label(), "group": {"order": g.order, "identity": g.identity,
                                                   "inverse": g.inverse.tolist()},
               "expectation": P.to_json(), "reports": [r.to_dict() for r in pre], "status": "ok"}
    elif cmd == "construct":
        doc = emit_structure_constants(h)
    else:
        doc = reps_document(h, spec.seed)
    _emit(doc, spec.output)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
