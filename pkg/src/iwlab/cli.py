"""Command-line front end: file I/O, the lemma-suite runner, report emission.

Exit codes: 0 = success, 1 = a mathematical violation was found (failed
suite, failed axiom check, failed compatibility), 2 = usage or input error
(malformed JSON with position, precision exhaustion).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from typing import List, Optional

from .euler import (
    EulerInstance,
    TowerSpec,
    c_ideal,
    check_axioms,
    derive,
    generate_universal,
    specialization_compat_check,
)
from .groups import FinAbGroup, GroupRingElem, howell_solve, kolyvagin_D
from .iwasawa import (
    ElementaryModule,
    Poly1,
    PolyIdeal,
    PrecisionExhausted,
    equivalent,
    find_good_specialization,
    poly_ideal_from_json,
    poly_ideal_to_json,
    slope_check,
    specialize,
)
from .modules import (
    FPModule,
    bidual_cap,
    bidual_reduction_check,
    fitting_ideal,
    xi_is_injective,
    xi_is_isomorphism,
)
from .rings import TruncatedLocalRing
from .selftest import SUITES, run_all

USAGE_ERROR = 2
VIOLATION = 1


class CliError(Exception):
    def __init__(self, message: str, code: int = USAGE_ERROR):
        super().__init__(message)
        self.code = code


def _load_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise CliError(f"input file not found: {path}")
    except json.JSONDecodeError as exc:
        raise CliError(f"malformed JSON in {path}: line {exc.lineno} column {exc.colno}: {exc.msg}")


def _emit(document: dict, fmt: str, out: Optional[str]) -> None:
    if fmt == "json":
        text = json.dumps(document, indent=2, sort_keys=True) + "\n"
    else:
        lines = []
        if "suites" in document:
            for s in document["suites"]:
                status = "PASS" if not s["failures"] else "FAIL"
                lines.append(
                    f"{status} {s['suite']} anchor={s['anchor']} cases={s['cases']} "
                    f"failures={len(s['failures'])}"
                )
        else:
            for key in sorted(document):
                lines.append(f"{key}: {json.dumps(document[key], sort_keys=True)}")
        text = "\n".join(lines) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def emit_report(results, seed: int, fmt: str, out: Optional[str]) -> dict:
    document = {
        "suites": [r.to_json() for r in results],
        "seed": seed,
        "cases": sum(r.cases for r in results),
        "failures": [f for r in results for f in r.failures],
    }
    _emit(document, fmt, out)
    return document


def _module_from_file(path: str) -> FPModule:
    return FPModule.from_json(_load_json(path))


def _cmd_fitt(args) -> int:
    module = _module_from_file(args.infile)
    ideal = fitting_ideal(module, args.i)
    _emit(
        {"i": args.i, "ideal": ideal.to_json()},
        args.format,
        args.out,
    )
    return 0


def _cmd_howell(args) -> int:
    data = _load_json(args.infile)
    ring = TruncatedLocalRing.from_descriptor(data["base"]["ring"])
    group = FinAbGroup.from_descriptor(data["base"]["group"])
    rows = [
        [GroupRingElem.from_json(ring, group, e) for e in row] for row in data["rows"]
    ]
    report: dict = {}
    if "rhs" in data:
        rhs = [GroupRingElem.from_json(ring, group, e) for e in data["rhs"]]
        sol = howell_solve(rows, rhs, ring, group)
        report["solvable"] = sol.solvable
        if sol.solvable:
            report["particular"] = [x.to_json() for x in sol.particular]
            report["kernel"] = [[x.to_json() for x in k] for k in sol.kernel]
        report["howell"] = sol.howell
    else:
        zero = [GroupRingElem.zero(ring, group) for _ in rows]
        sol = howell_solve(rows, zero, ring, group)
        report["howell"] = sol.howell
        report["kernel"] = [[x.to_json() for x in k] for k in sol.kernel]
    _emit(report, args.format, args.out)
    return 0


def _cmd_bidual(args) -> int:
    module = _module_from_file(args.infile)
    if args.nu is not None:
        rep = bidual_reduction_check(module, args.nu, args.i)
        _emit(
            {
                "i": args.i,
                "nu": args.nu,
                "hom_surjective": rep.hom_surjective,
                "isomorphic": rep.iso,
                "upstairs_size": rep.upstairs_size,
                "downstairs_size": rep.downstairs_size,
            },
            args.format,
            args.out,
        )
        return 0 if rep.passed else VIOLATION
    data = bidual_cap(module, args.i)
    _emit(
        {
            "i": args.i,
            "cap_generators": len(data.cap.gens),
            "cap_size": data.cap_size(),
            "xi_injective": xi_is_injective(data),
            "xi_isomorphism": xi_is_isomorphism(data),
        },
        args.format,
        args.out,
    )
    return 0


def _cmd_kolyvagin(args) -> int:
    data = _load_json(args.infile)
    ring = TruncatedLocalRing.from_descriptor(data["ring"])
    group = FinAbGroup.from_descriptor(data["group"])
    primes = [(tuple(pr["sigma"]), int(pr["order"])) for pr in data["primes"]]
    d_n = kolyvagin_D(ring, group, primes)
    _emit({"operator": d_n.to_json()}, args.format, args.out)
    return 0


def _instance_from_file(path: str, seed: int) -> EulerInstance:
    data = _load_json(path)
    if "classes" in data:
        return EulerInstance.from_json(data)
    tower = TowerSpec.from_json(data["tower"] if "tower" in data else data)
    if "seed" in data and isinstance(data["seed"], dict):
        seed_elem = GroupRingElem.from_json(tower.ring, tower.group, data["seed"])
    else:
        import random

        rng = random.Random(seed)
        from .selftest import random_group_ring_elem

        seed_elem = random_group_ring_elem(rng, tower.ring, tower.group, 0.5)
        if seed_elem.is_zero():
            seed_elem = GroupRingElem.one(tower.ring, tower.group)
    return generate_universal(tower, seed_elem)


def _cmd_euler(args) -> int:
    if args.action == "gen":
        inst = _instance_from_file(args.infile, args.seed)
        _emit(inst.to_json(), args.format, args.out)
        return 0
    inst = _instance_from_file(args.infile, args.seed)
    if args.action == "check":
        rep = check_axioms(inst)
        _emit(
            {
                "cases": rep.checked,
                "violations": [
                    {"kind": v.kind, "edge": repr(v.edge), "detail": v.detail}
                    for v in rep.violations
                ],
            },
            args.format,
            args.out,
        )
        return 0 if rep.passed else VIOLATION
    level = args.precision or inst.tower.adm_level
    if args.action == "derive":
        layer = _parse_layer(args.layer, inst)
        labels = [x for x in (args.n or "").split(",") if x]
        kappa = derive(inst, layer, labels, level)
        _emit(
            {
                "layer": list(kappa.layer),
                "n": list(kappa.modulus),
                "precision": kappa.precision,
                "ambient": kappa.ambient.to_json(),
                "descended": kappa.descended.to_json(),
                "sigma_choices": kappa.sigma_choices,
            },
            args.format,
            args.out,
        )
        return 0
    if args.action == "ideals":
        layer = _parse_layer(args.layer, inst)
        ideal = c_ideal(inst, layer, level, args.i)
        _emit({"i": args.i, "layer": list(layer), "ideal": ideal.to_json()}, args.format, args.out)
        return 0
    if args.action == "compat":
        u = inst.tower.ring.from_int(args.u)
        rep = specialization_compat_check(inst, args.gamma_index, u, args.i)
        _emit(
            {
                "containments": rep.containments,
                "aug_identity": rep.aug_identity,
                "details": rep.details,
            },
            args.format,
            args.out,
        )
        return 0 if rep.passed else VIOLATION
    raise CliError(f"unknown euler action {args.action!r}")


def _parse_layer(text: Optional[str], inst: EulerInstance):
    if not text:
        return tuple(inst.tower.gamma_orders)
    return tuple(int(x) for x in text.split(","))


def _cmd_ideal(args) -> int:
    data = _load_json(args.infile)
    if args.action == "compare":
        ideal_i = poly_ideal_from_json(data["I"])
        ideal_j = poly_ideal_from_json(data["J"])
        both, fwd, bwd = equivalent(ideal_i, ideal_j)

        def verdict(v):
            return {
                "holds": v.holds,
                "containment": v.containment,
                "degenerate_certificate": v.degenerate_certificate,
                "certificate": poly_ideal_to_json(v.certificate) if v.certificate else None,
                "verified_product": v.verified_product,
                "note": v.note,
            }

        _emit(
            {"equivalent": both, "I_below_J": verdict(fwd), "J_below_I": verdict(bwd)},
            args.format,
            args.out,
        )
        return 0
    if args.action == "specialize":
        ideal = poly_ideal_from_json(data["I"])
        u = ideal.ring.from_int(int(data.get("u", 1)))
        res = specialize(ideal, int(data["a1"]), int(data["a2"]), u)
        _emit(
            {
                "image": poly_ideal_to_json(res.ideal),
                "eliminated_var": res.eliminated_var,
                "truncated": res.truncated,
            },
            args.format,
            args.out,
        )
        return 0
    if args.action == "goodprime":
        ideal_i = poly_ideal_from_json(data["I"])
        ideal_j = poly_ideal_from_json(data["J"])
        units = [ideal_i.ring.from_int(x) for x in data.get("units", [])] or None
        res = find_good_specialization(ideal_i, ideal_j, int(data.get("radius", 2)), units)
        _emit(
            {
                "a1": res.a1,
                "a2": res.a2,
                "u": list(res.u.coeffs),
                "rejected": [[a, b, note] for a, b, note in res.rejected],
                "image_I": poly_ideal_to_json(res.image_i),
                "image_J": poly_ideal_to_json(res.image_j),
            },
            args.format,
            args.out,
        )
        return 0
    if args.action == "slope":
        ring = TruncatedLocalRing(int(data.get("p", 3)), int(data["N"]))
        divisors = []
        for g in data["divisors"]:
            coeffs: dict = {}
            for m in g["monomials"]:
                coeffs[m["e"][0]] = ring.elem(m["c"])
            top = max(coeffs) if coeffs else -1
            divisors.append(Poly1(ring, [coeffs.get(k, ring.zero()) for k in range(top + 1)]))
        module = ElementaryModule(ring, tuple(divisors))
        c = ring.elem(data.get("c", [0]))
        rep = slope_check(module, int(data.get("i", 0)), c, int(data.get("n_max", 6)))
        _emit(
            {
                "slope": rep.slope_reference,
                "values": rep.values,
                "offsets": rep.offsets,
                "slope_matches": rep.slope_matches,
                "offset_constant": rep.offset_constant,
                "chain_ok": module.chain_ok,
            },
            args.format,
            args.out,
        )
        return 0 if rep.passed else VIOLATION
    raise CliError(f"unknown ideal action {args.action!r}")


def _cmd_selftest(args) -> int:
    names = args.suite.split(",") if args.suite else None
    results = run_all(args.seed, jobs=args.jobs, names=names)
    emit_report(results, args.seed, args.format, args.out)
    return 0 if all(r.passed for r in results) else VIOLATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="iwlab",
        description="exact-arithmetic lab for group-ring algebra, Fitting ideals, "
        "truncated Iwasawa algebras and synthetic Euler-system towers",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--in", dest="infile", help="input JSON file")
        p.add_argument("--out", help="output file (default stdout)")
        p.add_argument("--seed", type=int, default=0, help="seed for randomized content")
        p.add_argument("--precision", type=int, default=None, help="precision override")
        p.add_argument("--jobs", type=int, default=1, help="parallel workers")
        p.add_argument("--format", choices=["json", "text"], default="json")

    p = sub.add_parser("fitt", help="Fitting ideal of a presented module")
    common(p)
    p.add_argument("--i", type=int, default=0, help="Fitting index")

    p = sub.add_parser("howell", help="Howell form / linear solve over a group ring")
    common(p)

    p = sub.add_parser("bidual", help="exterior bidual and its comparison map")
    common(p)
    p.add_argument("--i", type=int, default=1)
    p.add_argument("--nu", type=int, default=None, help="run the mod-p^nu reduction check")

    p = sub.add_parser("kolyvagin", help="Kolyvagin operator of a prime list")
    common(p)

    p = sub.add_parser("euler", help="synthetic Euler towers")
    p.add_argument("action", choices=["gen", "check", "derive", "ideals", "compat"])
    common(p)
    p.add_argument("--layer", help="comma-separated layer orders (default: top)")
    p.add_argument("--n", help="comma-separated prime labels")
    p.add_argument("--i", type=int, default=0, help="ideal index bound")
    p.add_argument("--gamma-index", type=int, default=0)
    p.add_argument("--u", type=int, default=1, help="evaluation unit (as an integer)")

    p = sub.add_parser("ideal", help="truncated Iwasawa-algebra ideals")
    p.add_argument("action", choices=["compare", "specialize", "goodprime", "slope"])
    common(p)

    p = sub.add_parser("selftest", help="run the lemma suites")
    common(p)
    p.add_argument("--suite", help="comma-separated subset of suite names")
    return parser


_DISPATCH = {
    "fitt": _cmd_fitt,
    "howell": _cmd_howell,
    "bidual": _cmd_bidual,
    "kolyvagin": _cmd_kolyvagin,
    "euler": _cmd_euler,
    "ideal": _cmd_ideal,
    "selftest": _cmd_selftest,
}


def run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command != "selftest" and args.infile is None:
            raise CliError(f"{args.command} requires --in")
        return _DISPATCH[args.command](args)
    except CliError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return exc.code
    except PrecisionExhausted as exc:
        sys.stderr.write(f"error: precision exhausted: {exc}\n")
        return USAGE_ERROR
    except (KeyError, ValueError, TypeError) as exc:
        sys.stderr.write(f"error: bad input: {exc}\n")
        return USAGE_ERROR


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
