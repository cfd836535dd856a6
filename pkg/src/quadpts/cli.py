"""Command-line entry point: ``quadpts <subcommand> ...``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import census as census_mod
from .congruence import GenusComputationError, congruence_data, level_bound, normalizer_quotient
from .cs_logic import ConsistencyError, compose_verdict
from .fp_geometry import (
    BudgetExceeded,
    ProjectiveScheme,
    WeierstrassCurve,
    count_points,
    mismatch_filter,
)
from .local import conic_verdict, hyperelliptic_everywhere_locally_soluble
from .pipeline import (
    EXIT_BUDGET,
    EXIT_CONSISTENCY,
    EXIT_MISSING,
    EXIT_OK,
    EXIT_USAGE,
    analyze_pencil,
    emit_tables,
    packaged_replay_config,
    run_pipeline,
    to_jsonable,
)
from .pencil import PencilCurve
from .polys import parse_hyperelliptic, parse_quadratic_form
from .zmod_gl2 import InvalidInput, admissible, gl2_level, index_in_gl2, parse_subgroup_line, sl2_part


def _print_json(obj) -> None:
    print(json.dumps(to_jsonable(obj), indent=2, sort_keys=True, ensure_ascii=False))


def _read_group_lines(source: str) -> list[tuple[str, str]]:
    """``(label, line)`` pairs from a file or a literal ``N; [[..]]; ...`` string."""
    p = Path(source)
    text = p.read_text() if p.exists() else source
    out = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        label, sep, rest = line.partition("|")
        out.append((label.strip(), rest.strip()) if sep else ("", line))
    if not out:
        raise InvalidInput("no group given")
    return out


def cmd_census(args) -> int:
    res = census_mod.enumerate_admissible(args.modulus, args.max_genus, allow_large=args.allow_large)
    payload = {"modulus": res.modulus, "max_genus": res.max_genus,
               "per_genus_tally": res.per_genus_tally, "classes": res.class_rows()}
    if args.labels:
        records, errors = census_mod.ingest_labels(_label_path(args.labels))
        report = census_mod.tally_match(res, records)
        payload["tally_match"] = report.as_dict()
        payload["label_errors"] = errors
    if args.json:
        _print_json(payload)
    else:
        print(f"modulus {res.modulus}: {len(res.admissible_classes)} classes, tally {res.per_genus_tally}")
        for row in payload["classes"]:
            print(f"  level {row['level']:>3}  index {row['index']:>4}  genus {row['genus']}  "
                  f"order {row['order']}")
        if "tally_match" in payload:
            t = payload["tally_match"]
            print("table match" if t["match"] else f"MISMATCH {t['mismatches']}")
    return EXIT_OK


def _label_path(name: str) -> Path:
    p = Path(name)
    if p.exists():
        return p
    q = census_mod.data_path(name)
    if q.exists():
        return q
    raise FileNotFoundError(name)


def _group_row(label: str, line: str, sl2_only: bool, with_bound: bool) -> dict:
    H = parse_subgroup_line(line)
    G = sl2_part(H)
    row = {"label": label}
    if not sl2_only:
        row.update(level=gl2_level(H), index=index_in_gl2(H), admissible=admissible(H))
    cd = congruence_data(G)
    row.update(sl2_level=cd.sl2_level, psl2_index=cd.index_psl2, e2=cd.e2, e3=cd.e3,
               cusps=cd.cusps, genus=cd.genus)
    if with_bound:
        nq = normalizer_quotient(G)
        row.update(normalizer_quotient_order=nq.quotient_order,
                   normalizer_element_orders=nq.order_counts(), level_bound=level_bound(G))
    return row


def cmd_genus(args) -> int:
    rows = [_group_row(lab, line, args.sl2, False) for lab, line in _read_group_lines(args.group)]
    if args.json:
        _print_json(rows)
    else:
        for r in rows:
            head = f"{r['label']}: " if r["label"] else ""
            if "level" in r:
                head += f"level {r['level']} index {r['index']} "
            print(f"{head}genus {r['genus']} (SL2 level {r['sl2_level']}, index {r['psl2_index']}, "
                  f"e2 {r['e2']}, e3 {r['e3']}, cusps {r['cusps']})")
    return EXIT_OK


def cmd_levelbound(args) -> int:
    rows = [_group_row(lab, line, True, True) for lab, line in _read_group_lines(args.group)]
    if args.json:
        _print_json(rows)
    else:
        for r in rows:
            head = f"{r['label']}: " if r["label"] else ""
            print(f"{head}SL2 level {r['sl2_level']}, normalizer quotient order "
                  f"{r['normalizer_quotient_order']}, level bound {r['level_bound']}")
    return EXIT_OK


def cmd_pencil(args) -> int:
    p = Path(args.file)
    if not p.exists():
        raise FileNotFoundError(args.file)
    lines = [ln.split("#", 1)[0].strip() for ln in p.read_text().splitlines()]
    lines = [ln for ln in lines if ln]
    base = [json.loads(args.base_point)] if args.base_point else None
    dossiers = []
    for i, line in enumerate(lines):
        label = args.label or (p.stem if len(lines) == 1 else f"{p.stem}#{i + 1}")
        curve = PencilCurve.from_line(line)
        dossiers.append(analyze_pencil(label, curve, base_points=base, jacobian=args.jacobian,
                                       jacobian_rational_points=args.jacobian_points,
                                       settings={"square_disc_height": args.height}))
    out = [d.to_dict(normalize=True) for d in dossiers]
    _print_json(out[0] if len(out) == 1 else out)
    return EXIT_OK


def cmd_conic(args) -> int:
    A, names = parse_quadratic_form(args.form, 3)
    v = conic_verdict(A, witness_height=args.height)
    if not v.soluble:
        print(f"INSOLUBLE at {v.obstruction}")
    elif v.witness is not None:
        print("POINT (" + ":".join(str(c) for c in v.witness) + ")")
    else:
        print(f"SOLUBLE (no witness up to height {args.height})")
    return EXIT_OK


def cmd_locsolve(args) -> int:
    res = hyperelliptic_everywhere_locally_soluble(parse_hyperelliptic(args.model))
    places = ", ".join(str(p) for p in res.places_checked)
    if res.soluble:
        print(f"LOCALLY SOLUBLE (places checked: {places})")
    else:
        print(f"INSOLUBLE at {res.obstruction} (places checked: {places})")
    return EXIT_OK


def cmd_count(args) -> int:
    S = ProjectiveScheme.from_file(args.scheme)
    print(count_points(S, args.p, args.k))
    return EXIT_OK


def cmd_mismatch(args) -> int:
    S = ProjectiveScheme.from_file(args.scheme)
    E = WeierstrassCurve.from_string(args.curve)
    primes = [int(x) for x in args.primes.split(",") if x.strip()]
    v = mismatch_filter(S, E, primes)
    for p, (a, b) in v.counts.items():
        print(f"p={p}: scheme {a}, curve {b}")
    print(v.status if not v.mismatch else f"MISMATCH at p={v.first_mismatch}")
    return EXIT_OK


def cmd_verdict(args) -> int:
    p = Path(args.bundle)
    if not p.exists():
        raise FileNotFoundError(args.bundle)
    bundle = json.loads(p.read_text())
    if any("compute" in r for r in bundle.get("rules", [])):
        from .pipeline import analyze_bundle

        rec = analyze_bundle(p).verdict
    else:
        rec = compose_verdict(bundle).as_dict()
    _print_json(rec)
    return EXIT_OK


def _run(config, out, tables: bool) -> int:
    res = run_pipeline(config, out)
    for m in res.messages:
        print(m, file=sys.stderr)
    if res.dossiers and tables:
        print(emit_tables(res.dossiers)[1], end="")
    if res.files:
        print(f"wrote {len(res.files)} files to {Path(res.files[0]).parent}")
    return res.exit_code


def cmd_replay(args) -> int:
    return _run(args.config or packaged_replay_config(), args.out, not args.quiet)


def cmd_run(args) -> int:
    return _run(args.config, args.out, not args.quiet)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="quadpts", description="Quadratic points on modular curves: tools")
    sub = ap.add_subparsers(dest="command")

    p = sub.add_parser("census", help="admissible subgroups of GL2(Z/N) for a prime power N")
    p.add_argument("modulus", type=int)
    p.add_argument("--max-genus", type=int, default=0)
    p.add_argument("--labels", help="label file (path or packaged name) to compare tallies with")
    p.add_argument("--allow-large", action="store_true")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_census)

    for name, func, hint in (("genus", cmd_genus, "level, index and genus of a group"),
                             ("levelbound", cmd_levelbound, "GL2 level bound from an SL2 part")):
        p = sub.add_parser(name, help=hint)
        p.add_argument("group", help="file of 'label | N; [[a,b],[c,d]]; ...' lines, or one such line")
        if name == "genus":
            p.add_argument("--sl2", action="store_true", help="generators lie in SL2; skip GL2 data")
        p.add_argument("--json", action="store_true")
        p.set_defaults(func=func)

    p = sub.add_parser("pencil", help="dossier for a genus-one intersection of two quadrics")
    p.add_argument("file")
    p.add_argument("--label")
    p.add_argument("--height", type=int, default=1000, help="square-discriminant search height")
    p.add_argument("--base-point", help="JSON list, e.g. [0,0,1,1]")
    p.add_argument("--jacobian", help="Weierstrass equation to compare with")
    p.add_argument("--jacobian-points", type=int, help="known #E(Q) of that curve")
    p.set_defaults(func=cmd_pencil)

    p = sub.add_parser("conic", help="Hasse-Minkowski test for a ternary form")
    p.add_argument("form")
    p.add_argument("--height", type=int, default=200)
    p.set_defaults(func=cmd_conic)

    p = sub.add_parser("locsolve", help="everywhere-local solubility of y^2 = f(x)")
    p.add_argument("model")
    p.set_defaults(func=cmd_locsolve)

    p = sub.add_parser("count", help="points of a projective scheme over F_{p^k}")
    p.add_argument("--scheme", required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--k", type=int, default=1)
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("mismatch", help="compare point counts of a scheme and an elliptic curve")
    p.add_argument("--scheme", required=True)
    p.add_argument("--curve", required=True)
    p.add_argument("--primes", default="3,5,7")
    p.set_defaults(func=cmd_mismatch)

    p = sub.add_parser("verdict", help="compose a verdict from an evidence bundle")
    p.add_argument("bundle")
    p.set_defaults(func=cmd_verdict)

    for name, func in (("replay", cmd_replay), ("run", cmd_run)):
        p = sub.add_parser(name, help="replay the packaged fixtures" if name == "replay"
                           else "run a pipeline config")
        p.add_argument("config", nargs="?" if name == "replay" else None)
        p.add_argument("--out", help="output directory")
        p.add_argument("--quiet", action="store_true")
        p.set_defaults(func=func)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "func", None):
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: missing input {exc}", file=sys.stderr)
        return EXIT_MISSING
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ConsistencyError as exc:
        print(f"consistency error: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY
    except (InvalidInput, GenusComputationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
