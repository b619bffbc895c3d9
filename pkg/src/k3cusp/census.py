"""Counting cuspidal cones over the classified models."""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field

from .model import (NAMED_MODELS, CentralFiber, ModelError, admits_cusp_model, available_flops,
                    build_named_model, component_automorphisms, cusp_certificates, flop_double_curve,
                    flop_type_I, model_canonical_form, validate_model)


class CensusInconsistencyError(ModelError):
    pass


# transcribed orbit lengths, checked against the automorphism computation
TRANSCRIBED_ORBIT_LENGTH = {label: 6 for label in NAMED_MODELS}
TRANSCRIBED_ORBIT_LENGTH.update({"Y_R(-7)": 3, "Y_T(-8,-8)": 3, "Y_T(-9,-9)": 3})


@dataclass
class CuspRecord:
    label: str
    dual_complex: str
    survivor: int
    cone_count: int
    orbit_length: int
    certificates: list = field(repr=False, default_factory=list)

    @property
    def contribution(self):
        return self.cone_count * self.orbit_length


@dataclass
class CensusReport:
    records: list
    total: int
    class_P_total: int
    class_T_total: int
    maximal_cones: int
    orbits_P: int
    orbits_T: int

    def summary_line(self):
        return (f"{self.total} = {self.class_P_total} + {self.class_T_total}; {self.maximal_cones}; "
                f"{self.orbits_P + self.orbits_T} = {self.orbits_P} + {self.orbits_T}")


def enumerate_admissible_models() -> list:
    out, seen = [], set()
    for label in NAMED_MODELS:
        m = build_named_model(label)
        key = model_canonical_form(m)
        if key in seen:
            raise CensusInconsistencyError(f"{label} duplicates an earlier model")
        seen.add(key)
        s, c = admits_cusp_model(m)
        if not c:
            raise CensusInconsistencyError(f"{label} has no cusp model")
        out.append(m)
    return out


def orbit_length(m: CentralFiber) -> int:
    auts = component_automorphisms(m)
    if 6 % len(auts):
        raise CensusInconsistencyError(f"{len(auts)} automorphisms do not divide 6")
    ell = 6 // len(auts)
    if m.name in TRANSCRIBED_ORBIT_LENGTH and TRANSCRIBED_ORBIT_LENGTH[m.name] != ell:
        raise CensusInconsistencyError(
            f"{m.name}: computed orbit length {ell}, transcribed {TRANSCRIBED_ORBIT_LENGTH[m.name]}")
    return ell


def _record(m: CentralFiber) -> CuspRecord:
    s, c = admits_cusp_model(m)
    certs = cusp_certificates(m, s)
    ell = orbit_length(m)
    if c not in (1, 2) or ell not in (3, 6):
        raise CensusInconsistencyError(f"{m.name}: (c, l) = ({c}, {ell})")
    ruled = any(cs.size() == 2 and sorted(q for _, q in cs.vertices) == [0, 0]
                for k, cs in enumerate(m.components) if k != s)
    if (c == 2) != ruled:
        raise CensusInconsistencyError(f"{m.name}: two cones must come from a quadric component")
    return CuspRecord(m.name, m.dual_complex, s, c, ell, certs)


def count_cuspidal_cones(models=None) -> CensusReport:
    models = enumerate_admissible_models() if models is None else models
    records = sorted((_record(m) for m in models), key=lambda r: NAMED_MODELS.index(r.label))
    by = {"P": 0, "T": 0}
    orb = {"P": 0, "T": 0}
    for r in records:
        by[r.dual_complex] += r.contribution
        orb[r.dual_complex] += r.cone_count
    total = by["P"] + by["T"]
    if total % 3:
        raise CensusInconsistencyError(f"{total} cones do not split into triples")
    return CensusReport(records, total, by["P"], by["T"], total // 3, orb["P"], orb["T"])


def maximal_cone_census(report: CensusReport | None = None) -> tuple:
    rep = report or count_cuspidal_cones()
    split = []
    for cls in ("P", "T"):
        t = rep.class_P_total if cls == "P" else rep.class_T_total
        if t % 3:
            raise CensusInconsistencyError(f"class {cls} total {t} is not divisible by 3")
        split.append(t // 3)
    return rep.maximal_cones, tuple(split), (rep.orbits_P, rep.orbits_T)


def census_table(report: CensusReport) -> str:
    lines = [f"{'model':<12} {'class':<5} {'c':>2} {'l':>2} {'c*l':>4}"]
    for r in report.records:
        lines.append(f"{r.label:<12} {r.dual_complex:<5} {r.cone_count:>2} {r.orbit_length:>2} {r.contribution:>4}")
    for cls, tot in (("P", report.class_P_total), ("T", report.class_T_total)):
        terms = {}
        for r in report.records:
            if r.dual_complex == cls:
                key = (r.orbit_length, r.cone_count)
                terms[key] = terms.get(key, 0) + 1
        parts = []
        for (ell, c), k in terms.items():
            parts.append(f"{ell}*{k}" if c == 1 else f"{ell}*{k}*{c}")
        lines.append(f"class {cls}: " + " + ".join(parts) + f" = {tot}")
    mx, split, orb = maximal_cone_census(report)
    lines.append(f"maximal cones: {report.total}/3 = {mx} = {split[0]} + {split[1]}")
    lines.append(f"orbits: {orb[0]} + {orb[1]} = {sum(orb)}")
    lines.append(report.summary_line())
    return "\n".join(lines)


def fan_skeleton(report: CensusReport | None = None) -> dict:
    rep = report or count_cuspidal_cones()
    cones = []
    for r in rep.records:
        for k, cert in enumerate(r.certificates):
            for copy in range(r.orbit_length // 3):
                cones.append({
                    "model": r.label, "dual_complex": r.dual_complex, "c": r.cone_count,
                    "l": r.orbit_length, "cone": k, "copy": copy,
                    "survivor": r.survivor,
                    "contracted_components": [i for i in range(3) if i != r.survivor],
                    "contracted_curves": {str(i): list(x) for i, x in enumerate(cert.contracted) if i != r.survivor},
                    "recipe": cert.recipe,
                    "orbit_id": f"{r.label}#{k}",
                })
    header = {"total": rep.total, "class_P": rep.class_P_total, "class_T": rep.class_T_total,
              "maximal_cones": rep.maximal_cones, "orbits": [rep.orbits_P, rep.orbits_T],
              "assumptions": ["each cuspidal cone lies in a unique maximal cone",
                              "finiteness of the set of cusp models", "orbit lengths transcribed and recomputed"]}
    return {"header": header, "cones": cones}


def export_fan_skeleton(path=None, report: CensusReport | None = None) -> str:
    text = json.dumps(fan_skeleton(report), indent=2, sort_keys=True) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


@dataclass
class FlopSearch:
    depth: int
    reached: int
    candidates: list  # (path, model) pairs that certify but are not among the classified models
    failures: list    # moves rejected by the flop preconditions


def _moves(m: CentralFiber):
    for k, v in available_flops(m):
        yield f"flop({k},{v})", lambda k=k, v=v: flop_type_I(m, k, v)
    if m.dual_complex == "T":
        yield "flop-double-curve", lambda: flop_double_curve(m)


def flop_search(depth: int = 2) -> FlopSearch:
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    start = [build_named_model(x) for x in NAMED_MODELS]
    known = {model_canonical_form(m) for m in start}
    seen = set(known)
    queue = deque((m, (m.name,), 0) for m in start)
    cands, fails = [], []
    while queue:
        m, path, d = queue.popleft()
        if d == depth:
            continue
        for name, go in _moves(m):
            try:
                n = go()
            except ModelError as e:
                fails.append((path + (name,), str(e)))
                continue
            key = model_canonical_form(n)
            if key in seen:
                continue
            seen.add(key)
            assert validate_model(n)
            s, c = admits_cusp_model(n)
            if c and key not in known:
                cands.append((path + (name,), n))
            queue.append((n, path + (name,), d + 1))
    return FlopSearch(depth, len(seen) - len(known), cands, fails)


def flop_search_falsifier(depth: int = 2) -> list:
    """Certifiable models reached by flops that are not among the classified ones."""
    return flop_search(depth).candidates
