"""Config-driven pipeline: dossiers per label, JSON persistence and summary tables."""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import re
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised on 3.10
    import tomli as tomllib

from . import census as census_mod
from .congruence import congruence_data, level_bound
from .cs_logic import NO, UNKNOWN, YES, ConsistencyError, VerdictRecord, compose_verdict
from .fp_geometry import (
    BudgetExceeded,
    LinearInvolution,
    ProjectiveScheme,
    WeierstrassCurve,
    fixed_locus,
    mismatch_filter,
    quotient_genus,
    torsion_bound,
)
from .local import conic_verdict, hyperelliptic_everywhere_locally_soluble
from .pencil import (
    NoRationalRuling,
    PencilCurve,
    jacobian_from_quartic,
    pencil_quartic,
    ruling_has_rational_line,
    singular_members,
    square_disc_members,
    vertex_line_divisor,
)
from .polys import parse_hyperelliptic
from .zmod_gl2 import (
    InvalidInput,
    admissible,
    gl2_level,
    index_in_gl2,
    mat_det,
    parse_subgroup_line,
    sl2_part,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_MISSING = 3
EXIT_BUDGET = 4
EXIT_CONSISTENCY = 5

DEFAULTS = {
    "square_disc_height": 1000,
    "witness_height": 200,
    "torsion_primes": [3, 5, 7, 11, 13],
}


class MissingInput(InvalidInput):
    """A file named in the configuration does not exist."""


# --- JSON helpers -------------------------------------------------------------

def to_jsonable(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, float, str)):
        return obj
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return sorted(to_jsonable(v) for v in obj)
    if hasattr(obj, "item"):  # numpy scalars
        return obj.item()
    return str(obj)


@dataclass
class Dossier:
    label: str
    kind: str
    inputs: dict = field(default_factory=dict)
    computations: list = field(default_factory=list)
    verdict: dict | None = None
    errors: list = field(default_factory=list)

    def record(self, operation: str, func, *args, **kwargs):
        """Run ``func`` and store its result under ``operation``."""
        start = time.perf_counter()
        result = func(*args, **kwargs)
        self.computations.append({
            "operation": operation,
            "result": to_jsonable(result),
            "seconds": round(time.perf_counter() - start, 6),
        })
        return result

    def result(self, operation: str):
        for c in self.computations:
            if c["operation"] == operation:
                return c["result"]
        raise KeyError(operation)

    def to_dict(self, normalize: bool = True) -> dict:
        comps = []
        for c in self.computations:
            c = dict(c)
            if normalize:
                c.pop("seconds", None)
            comps.append(c)
        return {"label": self.label, "kind": self.kind, "inputs": to_jsonable(self.inputs),
                "computations": comps, "verdict": self.verdict, "errors": list(self.errors)}

    def to_json(self, normalize: bool = True) -> str:
        return json.dumps(self.to_dict(normalize), indent=2, sort_keys=True, ensure_ascii=False) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "Dossier":
        return cls(d["label"], d["kind"], d.get("inputs", {}), d.get("computations", []),
                   d.get("verdict"), d.get("errors", []))

    @classmethod
    def from_json(cls, text: str) -> "Dossier":
        return cls.from_dict(json.loads(text))

    @property
    def verdict_record(self) -> VerdictRecord | None:
        return VerdictRecord.from_dict(self.verdict) if self.verdict else None


# --- stages -------------------------------------------------------------------

def _cone_summary(cone) -> dict:
    return {"parameter": list(cone.parameter), "rank": cone.rank, "vertex": cone.vertex,
            "base_plane": cone.base_plane, "base_conic": cone.conic_string,
            "conic_variables": list(cone.conic_variables)}


def analyze_pencil(label: str, curve: PencilCurve, *, base_points=None, jacobian: str | None = None,
                   jacobian_rational_points: int | None = None, involutions=(),
                   settings: dict | None = None) -> Dossier:
    """Build the genus-one dossier and its evidence bundle for a pencil curve."""
    s = dict(DEFAULTS, **(settings or {}))
    d = Dossier(label, "pencil", {
        "q1": str(curve.q1), "q2": str(curve.q2),
        "base_points": [list(p) for p in (base_points or [])],
        "jacobian": jacobian, "jacobian_rational_points": jacobian_rational_points,
        "square_disc_height": s["square_disc_height"], "witness_height": s["witness_height"],
    })
    quartic = pencil_quartic(curve)
    d.computations.append({"operation": "pencil_quartic", "result": to_jsonable({
        "coefficients": list(quartic.coefficients), "factored": str(quartic),
        "dehomogenized_v_over_u": quartic.dehomogenized("t", "u")})})
    members = singular_members(curve)
    d.record("singular_members", lambda: {
        "rational": [_cone_summary(c) for c in members.rational],
        "irrational": members.irrational,
        "count_with_multiplicity": members.multiplicity_total,
    })

    g12 = []  # each entry: {source, rational_divisor}
    conic_results = []
    soluble_cones = []
    for cone in members.rational:
        if cone.base_conic is None:
            continue
        v = conic_verdict(cone.base_conic, witness_height=s["witness_height"])
        conic_results.append({"parameter": list(cone.parameter), "conic": cone.conic_string,
                              "soluble": v.soluble, "obstruction": v.obstruction,
                              "witness": v.witness})
        g12.append({"source": f"cone {list(cone.parameter)}", "rational_divisor": v.soluble})
        if v.soluble:
            Q = curve.member(*cone.parameter)
            supplied = [p for p in (base_points or []) if Q(p) == 0]
            soluble_cones.append((not supplied, cone, supplied[0] if supplied else None))
    divisor_found = None
    # cones carrying a supplied base point first, then found witnesses
    for _, cone, point in sorted(soluble_cones, key=lambda t: t[0]):
        other = curve.q2 if cone.parameter[0] != 0 else curve.q1
        try:
            div = vertex_line_divisor(cone, other, point, witness_height=s["witness_height"])
        except NoRationalRuling:
            continue
        divisor_found = {
            "cone": list(cone.parameter), "vertex": div.vertex, "base_point": div.base_point,
            "binary_form": div.binary_form, "field_discriminant": div.field_discriminant,
            "point": div.point_string(), "rational_points": div.rational_points,
        }
        break
    d.computations.append({"operation": "base_conics", "result": to_jsonable(conic_results)})
    if divisor_found:
        d.computations.append({"operation": "vertex_line_divisor", "result": to_jsonable(divisor_found)})

    search = d.record("square_disc_members", square_disc_members, curve, s["square_disc_height"])
    seen = set()
    rulings = []
    for m in search.members:
        if not m.smooth or (m.u, m.v) in seen:
            continue
        seen.add((m.u, m.v))
        Q = curve.member(m.u, m.v)
        verdict = ruling_has_rational_line(Q)
        rulings.append({"member": [m.u, m.v], "quadric": str(Q), "isotropic": verdict.isotropic,
                        "obstruction": verdict.obstruction})
        for fam in ("ruling A", "ruling B"):
            g12.append({"source": f"{fam} of {[m.u, m.v]}", "rational_divisor": verdict.isotropic})
    d.computations.append({"operation": "ruling_has_rational_line", "result": to_jsonable(rulings)})

    jac = jacobian_from_quartic(quartic)
    jac_info = {"model": str(jac), "ainvs": list(jac.ainvs), "j_invariant": jac.j_invariant}
    if jacobian:
        E = WeierstrassCurve.from_string(jacobian)
        jac_info["fixture_j_invariant"] = E.model.j_invariant
        jac_info["j_match"] = E.model.j_invariant == jac.j_invariant
        jac_info["torsion_bound"] = torsion_bound(E, s["torsion_primes"])
    d.computations.append({"operation": "jacobian_from_quartic", "result": to_jsonable(jac_info)})

    for inv in involutions:
        S = ProjectiveScheme.from_strings([str(curve.q1), str(curve.q2)], ("x", "y", "z", "w"))
        fl = fixed_locus(S, LinearInvolution.from_rows(inv))
        d.computations.append({"operation": "fixed_locus", "result": to_jsonable({
            "involution": inv, "fixed_points": fl.count, "quotient_genus": quotient_genus(1, fl.count)})})

    rules = []
    if divisor_found:
        rules.append({"name": "rational_degree2_divisor", "outcome": True,
                      "inputs": {"field_discriminant": divisor_found["field_discriminant"]},
                      "refs": ["vertex_line_divisor"]})
    elif jacobian_rational_points is not None:
        consistent = jac_info.get("j_match", False) and \
            jac_info.get("torsion_bound", 0) % jacobian_rational_points == 0
        none_rational = not any(e["rational_divisor"] for e in g12)
        rules.append({"name": "no_rational_degree2_divisor",
                      "outcome": bool(consistent and none_rational and len(g12) == jacobian_rational_points),
                      "inputs": {"g12_constructed": g12, "jacobian_rational_points": jacobian_rational_points,
                                 "jacobian_consistent": consistent},
                      "refs": ["base_conics", "ruling_has_rational_line", "jacobian_from_quartic"]})
    bundle = {"label": label, "genus": 1, "rules": rules}
    d.verdict = compose_verdict(bundle).as_dict()
    return d


def analyze_group(label: str, line: str, *, with_level_bound: bool = False,
                  sl2_only: bool = False) -> Dossier:
    """Invariants of a group given as ``N; [[a,b],[c,d]]; ...``.

    With ``sl2_only`` the generators are taken to generate a subgroup of SL2.
    """
    d = Dossier(label, "group", {"generators": line, "sl2_only": sl2_only})
    H = parse_subgroup_line(line)
    if sl2_only:
        if any(mat_det(g, H.modulus) != 1 % H.modulus for g in H.generators):
            raise InvalidInput(f"{label}: generators are not in SL2")
    else:
        d.record("gl2_invariants", lambda: {"level": gl2_level(H), "index": index_in_gl2(H),
                                            "order": H.order, "admissible": admissible(H)})
    G = sl2_part(H)
    d.record("congruence_data", congruence_data, G)
    if with_level_bound:
        d.record("level_bound", level_bound, G)
    return d


def analyze_census(modulus: int, max_genus, labels=None) -> Dossier:
    d = Dossier(f"census-{modulus}", "census", {"modulus": modulus, "max_genus": max_genus,
                                                 "labels": str(labels) if labels else None})
    res = census_mod.enumerate_admissible(modulus, max_genus)
    d.computations.append({"operation": "enumerate_admissible", "result": to_jsonable({
        "classes": res.class_rows(), "per_genus_tally": res.per_genus_tally})})
    if labels:
        records, errors = census_mod.ingest_labels(labels)
        report = census_mod.tally_match(res, records)
        d.computations.append({"operation": "tally_match", "result": to_jsonable(report.as_dict())})
        d.errors.extend(errors)
    return d


def _resolve_quotient(q: dict, base: Path) -> dict:
    """Exclusion evidence for one genus-one quotient."""
    out = {"name": q.get("name", "?")}
    excluded = False
    if "locsolve" in q:
        res = hyperelliptic_everywhere_locally_soluble(parse_hyperelliptic(q["locsolve"]))
        out["locsolve"] = {"model": q["locsolve"], "soluble": res.soluble,
                           "obstruction": res.obstruction}
        excluded |= not res.soluble
    if "scheme" in q and "curve" in q:
        S = ProjectiveScheme.from_file(_resolve(base, q["scheme"]))
        E = WeierstrassCurve.from_string(q["curve"])
        mv = mismatch_filter(S, E, q.get("primes", [3, 5, 7]))
        out["mismatch"] = {"status": mv.status, "counts": mv.counts, "first_mismatch": mv.first_mismatch}
        excluded |= mv.mismatch
    if "ingested" in q:
        out["ingested"] = q["ingested"]
        excluded |= bool(q.get("excluded", False))
    out["excluded"] = excluded
    return out


def analyze_bundle(path: Path) -> Dossier:
    data = json.loads(path.read_text())
    label = data.get("label", path.stem)
    d = Dossier(label, "bundle", {"bundle": path.name})
    rules = []
    for rule in data.get("rules", []):
        rule = dict(rule)
        compute = rule.pop("compute", None)
        if compute and "quotients" in compute:
            qs = [_resolve_quotient(q, path.parent) for q in compute["quotients"]]
            d.computations.append({"operation": f"{rule['name']}:quotients", "result": to_jsonable(qs)})
            rule["inputs"] = dict(rule.get("inputs", {}), quotients=[q["name"] for q in qs])
            rule["outcome"] = all(q["excluded"] for q in qs)
        rules.append(rule)
    bundle = {"label": label, "genus": data.get("genus"), "rules": rules}
    d.verdict = compose_verdict(bundle).as_dict()
    return d


# --- orchestration ------------------------------------------------------------

def _resolve(base: Path, name) -> Path:
    p = Path(name)
    if not p.is_absolute():
        p = base / p
    if not p.exists():
        pkg = census_mod.data_path(str(name))
        if pkg.exists():
            return pkg
        raise MissingInput(f"input file not found: {name}")
    return p


@dataclass
class PipelineResult:
    exit_code: int
    dossiers: list
    files: list
    messages: list = field(default_factory=list)


def load_config(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise MissingInput(f"config file not found: {path}")
    try:
        cfg = tomllib.loads(path.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise InvalidInput(f"invalid config {path}: {exc}") from exc
    return cfg


def _safe_name(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]", "_", label)


def run_pipeline(config_path, output_dir=None, normalize: bool = True) -> PipelineResult:
    """Run every stage listed in the config; returns the exit status and dossiers."""
    try:
        cfg = load_config(config_path)
    except MissingInput as exc:
        return PipelineResult(EXIT_MISSING, [], [], [str(exc)])
    except InvalidInput as exc:
        return PipelineResult(EXIT_USAGE, [], [], [str(exc)])
    base = Path(config_path).resolve().parent
    stages = [k for k in ("census", "group", "curve", "bundle") if cfg.get(k)]
    if not stages:
        return PipelineResult(EXIT_USAGE, [], [], ["config lists no census, group, curve or bundle entries"])
    run = cfg.get("run", {})
    settings = dict(DEFAULTS, **cfg.get("search", {}))
    # relative output paths are taken from the working directory, never the config's
    out_dir = Path(output_dir or run.get("output_dir", "quadpts-out"))
    normalize = run.get("normalize", normalize)

    dossiers, messages = [], []
    status = EXIT_OK

    def bump(code):
        nonlocal status
        status = max(status, code)

    try:
        jobs = []
        for c in cfg.get("census", []):
            labels = _resolve(base, c["labels"]) if c.get("labels") else None
            jobs.append(("census", lambda c=c, labels=labels: analyze_census(
                int(c["modulus"]), c.get("max_genus", 0), labels), f"census-{c.get('modulus')}"))
        for g in cfg.get("group", []):
            jobs.append(("group", lambda g=g: analyze_group(
                g["label"], g["generators"], with_level_bound=g.get("level_bound", False),
                sl2_only=g.get("sl2_only", False)), g["label"]))
        for cv in cfg.get("curve", []):
            text = _resolve(base, cv["quadrics"]).read_text() if "quadrics" in cv else cv["equations"]
            line = " ".join(ln.split("#", 1)[0] for ln in text.splitlines()).strip()
            curve = PencilCurve.from_line(line)
            jobs.append(("curve", lambda cv=cv, curve=curve: analyze_pencil(
                cv["label"], curve, base_points=cv.get("base_points"), jacobian=cv.get("jacobian"),
                jacobian_rational_points=cv.get("jacobian_rational_points"),
                involutions=cv.get("involutions", []), settings=settings), cv["label"]))
        for b in cfg.get("bundle", []):
            p = _resolve(base, b["path"])
            jobs.append(("bundle", lambda p=p: analyze_bundle(p), p.stem))
    except MissingInput as exc:
        return PipelineResult(EXIT_MISSING, [], [], [str(exc)])
    except (KeyError, InvalidInput) as exc:
        return PipelineResult(EXIT_USAGE, [], [], [f"bad config entry: {exc}"])

    for kind, job, label in jobs:
        try:
            dossiers.append(job())
        except ConsistencyError as exc:
            bump(EXIT_CONSISTENCY)
            dossiers.append(Dossier(label, kind, errors=[f"consistency: {exc}"]))
            messages.append(f"{label}: consistency error: {exc}")
        except BudgetExceeded as exc:
            bump(EXIT_BUDGET)
            dossiers.append(Dossier(label, kind, errors=[f"budget: {exc}"]))
            messages.append(f"{label}: budget exceeded: {exc}")
        except MissingInput as exc:
            bump(EXIT_MISSING)
            messages.append(f"{label}: {exc}")

    out_dir.mkdir(parents=True, exist_ok=True)
    files = []
    for d in dossiers:
        p = out_dir / f"{_safe_name(d.label)}.json"
        p.write_text(d.to_json(normalize))
        files.append(p)
    csv_text, text = emit_tables(dossiers) if dossiers else ("", "")
    (out_dir / "summary.csv").write_text(csv_text)
    (out_dir / "summary.txt").write_text(text)
    files += [out_dir / "summary.csv", out_dir / "summary.txt"]
    return PipelineResult(status, dossiers, files, messages)


def emit_tables(dossiers) -> tuple[str, str]:
    """CSV rows per dossier plus an aligned text report with tallies."""
    if not dossiers:
        raise InvalidInput("emit_tables needs at least one dossier")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["label", "kind", "genus", "hyperelliptic", "positive_rank_bielliptic",
                "infinitely_many_quadratic_points", "deciding_rule"])
    tally = {YES: 0, NO: 0, UNKNOWN: 0}
    per_genus: dict = {}
    per_rule: dict = {}
    unresolved = []
    census_rows = []
    for d in dossiers:
        v = d.verdict
        if v:
            w.writerow([d.label, d.kind, v["genus"], v["hyperelliptic"], v["positive_rank_bielliptic"],
                        v["infinitely_many_quadratic_points"], v["deciding_rule"]])
            val = v["infinitely_many_quadratic_points"]
            tally[val] += 1
            per_genus.setdefault(v["genus"], {YES: 0, NO: 0, UNKNOWN: 0})[val] += 1
            rule = v["deciding_rule"] or "(none)"
            per_rule[rule] = per_rule.get(rule, 0) + 1
            if val == UNKNOWN:
                unresolved.append(d.label)
        elif d.kind == "census":
            res = d.result("enumerate_admissible")
            for row in res["classes"]:
                census_rows.append((d.label, row["level"], row["index"], row["genus"], row["order"]))
                w.writerow([d.label, "census", row["genus"], "", "", "", f"level={row['level']} index={row['index']}"])
        else:
            w.writerow([d.label, d.kind, "", "", "", "", ""])
            if d.errors:
                unresolved.append(d.label)
    lines = ["Verdict tally", f"  {'yes':<8}{tally[YES]}", f"  {'no':<8}{tally[NO]}",
             f"  {'unknown':<8}{tally[UNKNOWN]}", "", "Per genus"]
    lines.append(f"  {'genus':<8}{'yes':>5}{'no':>5}{'unknown':>9}")
    for g in sorted(per_genus):
        t = per_genus[g]
        lines.append(f"  {g:<8}{t[YES]:>5}{t[NO]:>5}{t[UNKNOWN]:>9}")
    lines += ["", "Per deciding rule"]
    width = max((len(r) for r in per_rule), default=4) + 2
    for r in sorted(per_rule):
        lines.append(f"  {r:<{width}}{per_rule[r]}")
    if census_rows:
        lines += ["", "Census classes", f"  {'census':<12}{'level':>6}{'index':>7}{'genus':>7}{'order':>8}"]
        for row in census_rows:
            lines.append(f"  {row[0]:<12}{row[1]:>6}{row[2]:>7}{row[3]:>7}{row[4]:>8}")
    lines += ["", "Unresolved"]
    lines += [f"  {lab}" for lab in unresolved] or ["  (none)"]
    return buf.getvalue(), "\n".join(lines) + "\n"


def packaged_replay_config() -> Path:
    return Path(__file__).parent / "fixtures" / "replay.toml"
