"""Command-line front end.

Every library operation is exposed as a verb; JSON is the interchange
format (CSV only for rate grids).  Exit status: 0 on success, 1 when a
verification verdict is negative, 2 on usage or guard errors.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import random
import sys
from fractions import Fraction

from . import fftensor, groups, rates, slicerank, stpp, sumfree

VERIFICATION_FAILED = 1
USAGE_ERROR = 2


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", help="write the JSON/CSV report to this file")
    parser.add_argument("--seed", type=int, default=0, help="seed for randomized samplers")
    parser.add_argument("--threads", type=int, default=1, help="worker cap for parallel loops")


def _emit(args, payload: dict | str) -> None:
    if isinstance(payload, dict):
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    else:
        text = payload
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _parse_fraction(text: str) -> Fraction:
    return Fraction(text)


# ---------------------------------------------------------------------------
# verb implementations
# ---------------------------------------------------------------------------


def cmd_bound(args) -> int:
    g = groups.parse_group_spec(args.group)
    bounds = sumfree.size_bounds(g)
    payload = {
        "group": g.to_dict(),
        "order": g.order,
        "exponent": g.exponent,
        "bounds": bounds.to_dict(),
    }
    if args.exhaustive:
        size, witness = sumfree.max_sumfree_exhaustive(
            g, limit=args.limit, threads=args.threads
        )
        payload["exhaustive_max"] = size
        payload["witness"] = [[list(e) for e in t] for t in witness.triples]
    _emit(args, payload)
    return 0


def cmd_rates(args) -> int:
    ms = list(range(1, args.m_max + 1))
    alphas = [_parse_fraction(a) for a in args.alpha]
    rows = rates.rate_grid_rows(ms, alphas, args.n)
    buffer = io.StringIO()
    rates.write_rate_csv(rows, buffer)
    _emit(args, buffer.getvalue())
    if args.figures:
        from . import plots

        paths = plots.render_rate_report(rows, args.figures)
        print("\n".join(f"figure: {p}" for p in paths), file=sys.stderr)
    return 0


def cmd_constants(args) -> int:
    _emit(args, rates.constants())
    return 0


def cmd_sumfree_verify(args) -> int:
    candidate = sumfree.TricoloredSumFreeSet.from_dict(_load_json(args.infile))
    ok, violation = sumfree.verify_sumfree(candidate)
    _emit(
        args,
        {
            "valid": ok,
            "violation": [list(e) for e in violation] if violation else None,
            "cardinality": candidate.cardinality,
        },
    )
    return 0 if ok else VERIFICATION_FAILED


def cmd_sumfree_search(args) -> int:
    g = groups.parse_group_spec(args.group)
    size, witness = sumfree.max_sumfree_exhaustive(g, limit=args.limit, threads=args.threads)
    _emit(
        args,
        {
            "group": g.to_dict(),
            "max_size": size,
            "witness": [[list(e) for e in t] for t in witness.triples],
        },
    )
    return 0


def cmd_stpp_verify(args) -> int:
    construction = stpp.STPPConstruction.from_dict(_load_json(args.infile))
    ok = stpp.verify_stpp(construction)
    _emit(args, {"valid": ok})
    return 0 if ok else VERIFICATION_FAILED


def cmd_packing(args) -> int:
    construction = stpp.STPPConstruction.from_dict(_load_json(args.infile))
    if not stpp.verify_stpp(construction):
        _emit(args, {"valid": False})
        return VERIFICATION_FAILED
    report = stpp.packing_report(construction)
    _emit(args, report.to_dict() if report else {"packing": None, "reason": "trivial group"})
    return 0


def cmd_omega(args) -> int:
    if args.infile:
        construction = stpp.STPPConstruction.from_dict(_load_json(args.infile))
        if not stpp.verify_stpp(construction):
            _emit(args, {"valid": False})
            return VERIFICATION_FAILED
        report = stpp.omega_report(construction)
    else:
        if not args.sizes or args.order is None:
            raise ValueError("omega needs --in FILE, or --sizes and --order")
        report = stpp.omega_report(args.sizes, args.order)
    _emit(args, report.to_dict())
    return 0


def cmd_border(args) -> int:
    construction = stpp.STPPConstruction.from_dict(_load_json(args.infile))
    border = stpp.border_from_stpp(construction)
    payload = border.to_dict()
    payload["cardinality"] = border.cardinality
    payload["weight_range"] = border.weight_range
    _emit(args, payload)
    return 0


def cmd_unborder(args) -> int:
    border = sumfree.BorderSumFreeSet.from_dict(_load_json(args.infile))
    result = stpp.unborder(border, args.power, guard=args.guard)
    ok, _ = sumfree.verify_sumfree(result)
    payload = result.to_dict()
    payload["cardinality"] = result.cardinality
    payload["valid"] = ok
    _emit(args, payload)
    return 0 if ok else VERIFICATION_FAILED


def cmd_uniformize(args) -> int:
    construction = stpp.STPPConstruction.from_dict(_load_json(args.infile))
    symbolic = stpp.uniformize(construction, args.power)
    payload = symbolic.to_dict()
    if args.samples:
        rng = random.Random(args.seed)
        u = symbolic.sample_index(symbolic.mu1, rng)
        v = symbolic.sample_index(symbolic.mu2, rng)
        w = symbolic.sample_index(symbolic.mu3, rng)
        payload["sampled_members"] = {
            kind: [
                list(symbolic.sample_member(kind, u, v, w, rng))
                for _ in range(args.samples)
            ]
            for kind in ("A", "B", "C")
        }
        payload["sampled_index"] = {"u": list(u), "v": list(v), "w": list(w)}
    _emit(args, payload)
    return 0


def cmd_tensor(args) -> int:
    g = groups.parse_group_spec(args.group)
    t = fftensor.group_tensor(g, args.p)
    _emit(args, t.to_dict())
    return 0


def _tensor_from_args(args) -> fftensor.Tensor3:
    if args.infile:
        return fftensor.Tensor3.from_dict(_load_json(args.infile))
    if args.group:
        return fftensor.group_tensor(groups.parse_group_spec(args.group), args.p)
    raise ValueError("need --in FILE or --group SPEC with --p")


def cmd_slicerank(args) -> int:
    t = _tensor_from_args(args)
    rank = slicerank.exact_slice_rank(t, threads=args.threads)
    payload = {"dims": list(t.dims), "p": t.field.p, "slice_rank": rank}
    if args.extract:
        decomposition = slicerank.extract_slice_decomposition(t, threads=args.threads)
        payload["decomposition"] = decomposition.to_dict()
    _emit(args, payload)
    return 0


def cmd_triangle(args) -> int:
    if args.cyclic:
        td = slicerank.triangle_decomposition_cyclic(args.cyclic)
        base = fftensor.group_tensor(groups.GroupSpec([(args.cyclic, 1)]), td.field.p)
        target = fftensor.cyclic_shift_z(base, td.z_shift)
    elif args.poly:
        if args.p is None:
            raise ValueError("--poly needs --p")
        values = [int(v) for v in args.poly.split(",")]
        td = slicerank.triangle_decomposition_poly(values, args.p)
        target = slicerank.poly_sum_tensor(values, args.p)
    else:
        raise ValueError("triangle needs --cyclic Q or --poly VALUES --p P")
    ok = slicerank.verify_triangle_decomposition(target, td)
    payload = td.to_dict()
    payload["verified"] = ok
    _emit(args, payload)
    return 0 if ok else VERIFICATION_FAILED


def cmd_instability(args) -> int:
    t = _tensor_from_args(args)
    if args.certificate:
        cert = slicerank.InstabilityCertificate.from_dict(_load_json(args.certificate))
        ok = slicerank.verify_instability_certificate(t, cert)
        _emit(args, {"valid": ok, "epsilon": str(cert.epsilon)})
        return 0 if ok else VERIFICATION_FAILED
    if args.from_slice:
        decomposition = slicerank.SliceDecomposition.from_dict(_load_json(args.from_slice))
        cert = slicerank.instability_from_slice(decomposition, t.dims)
        ok = slicerank.verify_instability_certificate(t, cert)
        payload = cert.to_dict()
        payload["valid"] = ok
        _emit(args, payload)
        return 0 if ok else VERIFICATION_FAILED
    if args.search:
        cert = slicerank.search_instability_certificate(t, max_weight=args.max_weight)
        if cert is None:
            _emit(args, {"certificate": None, "max_weight": args.max_weight})
            return 0
        payload = cert.to_dict()
        payload["valid"] = True
        _emit(args, payload)
        return 0
    raise ValueError("instability needs --certificate, --from-slice, or --search")


def cmd_count(args) -> int:
    weights = [int(v) for v in args.weights.split(",")]
    threshold = _parse_fraction(args.threshold)
    count = slicerank.weighted_tuple_count(weights, args.n, threshold)
    total = len(weights) ** args.n
    lo, hi = min(weights), max(weights)
    mean = Fraction(sum(weights), len(weights))
    payload = {
        "count": count,
        "total": total,
        "fraction": count / total,
    }
    if hi > lo:
        epsilon = (mean - threshold) / (hi - lo)
        if epsilon >= 0:
            payload["epsilon"] = str(epsilon)
            payload["hoeffding_bound"] = math.exp(-2.0 * args.n * float(epsilon) ** 2)
    _emit(args, payload)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sumrank",
        description="sum-free sets, slice rank certificates, and omega diagnostics",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("bound", help="size bounds for a group")
    p.add_argument("--group", required=True)
    p.add_argument("--exhaustive", action="store_true")
    p.add_argument("--limit", type=int, default=sumfree.DEFAULT_EXHAUSTIVE_GUARD)
    _common(p)
    p.set_defaults(fn=cmd_bound)

    p = sub.add_parser("rates", help="rate-function grid as CSV (optionally with figures)")
    p.add_argument("--m-max", type=int, default=8)
    p.add_argument("--alpha", action="append", default=None)
    p.add_argument("--n", type=int, default=6)
    p.add_argument("--figures", help="directory for the report figures")
    _common(p)
    p.set_defaults(fn=cmd_rates)

    p = sub.add_parser("constants", help="the headline constants epsilon and delta")
    _common(p)
    p.set_defaults(fn=cmd_constants)

    p = sub.add_parser("sumfree-verify", help="verify a tricolored sum-free set")
    p.add_argument("--in", dest="infile", required=True)
    _common(p)
    p.set_defaults(fn=cmd_sumfree_verify)

    p = sub.add_parser("sumfree-search", help="exhaustive maximum sum-free set")
    p.add_argument("--group", required=True)
    p.add_argument("--limit", type=int, default=sumfree.DEFAULT_EXHAUSTIVE_GUARD)
    _common(p)
    p.set_defaults(fn=cmd_sumfree_search)

    p = sub.add_parser("stpp-verify", help="verify an STPP construction")
    p.add_argument("--in", dest="infile", required=True)
    _common(p)
    p.set_defaults(fn=cmd_stpp_verify)

    p = sub.add_parser("packing", help="packing exponents of a construction")
    p.add_argument("--in", dest="infile", required=True)
    _common(p)
    p.set_defaults(fn=cmd_packing)

    p = sub.add_parser("omega", help="omega bound via bisection")
    p.add_argument("--in", dest="infile")
    p.add_argument("--sizes", type=int, nargs="+")
    p.add_argument("--order", type=int)
    _common(p)
    p.set_defaults(fn=cmd_omega)

    p = sub.add_parser("border", help="border sum-free set from an STPP construction")
    p.add_argument("--in", dest="infile", required=True)
    _common(p)
    p.set_defaults(fn=cmd_border)

    p = sub.add_parser("unborder", help="genuine sum-free set in a power group")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--power", type=int, required=True)
    p.add_argument("--guard", type=int, default=stpp.DEFAULT_UNBORDER_GUARD)
    _common(p)
    p.set_defaults(fn=cmd_unborder)

    p = sub.add_parser("uniformize", help="uniform symbolic power construction")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--power", type=int, required=True)
    p.add_argument("--samples", type=int, default=0)
    _common(p)
    p.set_defaults(fn=cmd_uniformize)

    p = sub.add_parser("tensor", help="group multiplication tensor as JSON")
    p.add_argument("--group", required=True)
    p.add_argument("--p", type=int, required=True)
    _common(p)
    p.set_defaults(fn=cmd_tensor)

    p = sub.add_parser("slicerank", help="exact slice rank (guarded oracle)")
    p.add_argument("--in", dest="infile")
    p.add_argument("--group")
    p.add_argument("--p", type=int, default=2)
    p.add_argument("--extract", action="store_true")
    _common(p)
    p.set_defaults(fn=cmd_slicerank)

    p = sub.add_parser("triangle", help="triangle decompositions (cyclic or polynomial)")
    p.add_argument("--cyclic", type=int)
    p.add_argument("--poly", help="comma-separated values of P on F_p")
    p.add_argument("--p", type=int)
    _common(p)
    p.set_defaults(fn=cmd_triangle)

    p = sub.add_parser("instability", help="instability certificates")
    p.add_argument("--in", dest="infile")
    p.add_argument("--group")
    p.add_argument("--p", type=int, default=2)
    p.add_argument("--certificate")
    p.add_argument("--from-slice", dest="from_slice")
    p.add_argument("--search", action="store_true")
    p.add_argument("--max-weight", type=int, default=2)
    _common(p)
    p.set_defaults(fn=cmd_instability)

    p = sub.add_parser("count", help="exact bounded-sum tuple counts")
    p.add_argument("--weights", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--threshold", required=True)
    _common(p)
    p.set_defaults(fn=cmd_count)

    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.verb == "rates" and args.alpha is None:
        args.alpha = ["1/3"]
    try:
        return args.fn(args)
    except (ValueError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
