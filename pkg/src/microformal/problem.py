"""JSON problem files: loading, validation and task execution.

A problem file is a JSON object::

    {
      "charts": {"M1": {"even": ["x"], "odd": []}, "M2": {"even": ["y"]}, "N": "u"},
      "relations": {"R": {"source": "M1", "target": "M2", "kind": "even",
                           "body": "x*q + 1/2*q^2", "fibers": ["q"], "fiber_cap": 2}},
      "functions": {"g": {"chart": "M2", "body": "y^2"}},
      "hamiltonians": {"H": {"chart": "M1", "kind": "cotangent", "body": "p_x^2"}},
      "coordinate_changes": {"C": {"old": "M2", "new": "N", "map": {"y": "2*u"}}},
      "tasks": [{"op": "pullback", "relation": "R", "function": "g", "order": 2}]
    }

Polynomial bodies use the canonical text grammar of :func:`parse_poly`.
Wherever a task names a function or Hamiltonian it may instead give
polynomial text directly.  Tasks with ``"as"`` register their result under
that name for later tasks.  ``"assert": "zero" | "nonzero"`` turns a defect
task into an assertion and ``"expect": "<poly>"`` compares a result.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

from . import brackets as br
from . import hamjac as hj
from .errors import ChartError, MicroformalError, ParityError, ParseError
from .geometry import ANTICOTANGENT, COTANGENT, Chart, CoordinateChange, PhaseChart, build_phase_chart
from .relations import (
    EVEN_KIND,
    ODD_KIND,
    MicroRelation,
    change_target_coords,
    compose,
    legendre_change_target_coords,
    pull,
    pullback,
    tangent_pullback,
    tensor_law,
)
from .superalg import SuperPoly, Variable, parse_poly

FIBER_KIND = {EVEN_KIND: COTANGENT, ODD_KIND: ANTICOTANGENT}
OPERATIONS = ("pullback", "tangent", "compose", "coords", "bracket", "derived", "jacobiator", "master", "hj")
HJ_MODES = ("apply", "commutator", "related", "morphism", "odd_shift")
SECTIONS = ("charts", "relations", "functions", "hamiltonians", "coordinate_changes", "tasks")


class ValidationError(MicroformalError, ValueError):
    """A problem file refers to something missing or inconsistent."""


@dataclass
class Function:
    chart: Chart
    body: SuperPoly


@dataclass
class Problem:
    charts: dict = field(default_factory=dict)
    relations: dict = field(default_factory=dict)
    functions: dict = field(default_factory=dict)
    hamiltonians: dict = field(default_factory=dict)
    changes: dict = field(default_factory=dict)
    tasks: list = field(default_factory=list)


@dataclass
class Settings:
    order: int | None = None
    fiber_cap: int | None = None
    timing: bool = False


def text(f: SuperPoly) -> str:
    return str(f)


def _poly(body: str, variables, where: str) -> SuperPoly:
    if not isinstance(body, str):
        body = str(body)
    try:
        return parse_poly(body, variables)
    except ParseError as exc:
        raise ParseError(f"{where}: {exc.message}", position=exc.position) from None


def _get(table: dict, name, what: str):
    if not isinstance(name, str) or name not in table:
        raise ValidationError(f"unknown {what} {name!r}")
    return table[name]


# --------------------------------------------------------------------------
# loading


def parse_chart_spec(spec: str, name: str = "M") -> Chart:
    """``"x,y|xi"``: even names before the bar, odd names after it."""
    even, _, odd = spec.partition("|")
    split = lambda s: [t.strip() for t in s.split(",") if t.strip()]
    return Chart.make(name, split(even), split(odd))


def _chart(name: str, data) -> Chart:
    if isinstance(data, str):
        return parse_chart_spec(data, name)
    if isinstance(data, list):
        even = [d["name"] for d in data if int(d.get("parity", 0)) == 0]
        odd = [d["name"] for d in data if int(d.get("parity", 0)) == 1]
        return Chart.make(name, even, odd)
    if isinstance(data, dict):
        unknown = set(data) - {"even", "odd"}
        if unknown:
            raise ValidationError(f"chart {name}: unknown keys {sorted(unknown)}")
        return Chart.make(name, data.get("even", []), data.get("odd", []))
    raise ValidationError(f"chart {name}: expected an object, list or string")


def _cap(value, where: str):
    if value is None:
        return None
    if not isinstance(value, int) or isinstance(value, bool) or value < 1:
        raise ValidationError(f"{where}: caps must be positive integers, got {value!r}")
    return value


def _phase(problem: Problem, chart_name: str, kind: str, fibers, where: str) -> PhaseChart:
    chart = _get(problem.charts, chart_name, "chart")
    if kind not in (COTANGENT, ANTICOTANGENT):
        raise ValidationError(f"{where}: phase kind must be cotangent or anticotangent, got {kind!r}")
    try:
        return build_phase_chart(chart, kind, fibers)
    except (ValueError, TypeError) as exc:
        raise ValidationError(f"{where}: {exc}") from None


def load_problem(data: dict) -> Problem:
    """Build and validate a problem from decoded JSON."""
    if not isinstance(data, dict):
        raise ValidationError("a problem file must contain a JSON object")
    unknown = set(data) - set(SECTIONS)
    if unknown:
        raise ValidationError(f"unknown top-level keys {sorted(unknown)}")
    pb = Problem()
    for name, d in data.get("charts", {}).items():
        pb.charts[name] = _chart(name, d)
    for name, d in data.get("relations", {}).items():
        where = f"relations.{name}"
        kind = d.get("kind", EVEN_KIND)
        if kind not in FIBER_KIND:
            raise ValidationError(f"{where}: kind must be 'even' or 'odd', got {kind!r}")
        fk = FIBER_KIND[kind]
        src = _phase(pb, d.get("source"), fk, d.get("source_fibers"), where)
        tgt = _phase(pb, d.get("target"), fk, d.get("fibers"), where)
        body = _poly(d.get("body", "0"), src.base.variables + tgt.fibers, f"{where}.body")
        pb.relations[name] = MicroRelation(src, tgt, body, _cap(d.get("fiber_cap"), where))
    for name, d in data.get("functions", {}).items():
        chart = _get(pb.charts, d.get("chart"), "chart")
        body = _poly(d.get("body", "0"), chart.variables, f"functions.{name}.body")
        if "parity" in d and not body.has_parity(int(d["parity"])):
            raise ParityError(f"functions.{name}: body is not of declared parity {d['parity']}")
        pb.functions[name] = Function(chart, body)
    for name, d in data.get("hamiltonians", {}).items():
        where = f"hamiltonians.{name}"
        ph = _phase(pb, d.get("chart"), d.get("kind", COTANGENT), d.get("fibers"), where)
        body = _poly(d.get("body", "0"), ph.variables, f"{where}.body")
        try:
            pb.hamiltonians[name] = br.Hamiltonian(ph, body, d.get("parity"))
        except ParityError as exc:
            raise ParityError(f"{where}: {exc}") from None
    for name, d in data.get("coordinate_changes", {}).items():
        where = f"coordinate_changes.{name}"
        old = _get(pb.charts, d.get("old"), "chart")
        spec = d.get("new")
        if isinstance(spec, str):
            new = _get(pb.charts, spec, "chart")
        else:
            new = _chart(d.get("new_name", f"{old.name}n"), spec)
        mapping = {}
        for k, v in d.get("map", {}).items():
            mapping[k] = _poly(v, new.variables, f"{where}.map.{k}")
        pb.changes[name] = CoordinateChange.from_mapping(new, old, mapping, _cap(d.get("order"), where) or 3)
    tasks = data.get("tasks", [])
    if not isinstance(tasks, list):
        raise ValidationError("tasks must be a list")
    for k, t in enumerate(tasks):
        if not isinstance(t, dict) or t.get("op") not in OPERATIONS:
            raise ValidationError(f"tasks[{k}]: unknown task {t.get('op') if isinstance(t, dict) else t!r}")
        if t["op"] == "hj" and t.get("mode") not in HJ_MODES:
            raise ValidationError(f"tasks[{k}]: unknown hj mode {t.get('mode')!r}")
        if t.get("assert") not in (None, "zero", "nonzero"):
            raise ValidationError(f"tasks[{k}]: assert must be 'zero' or 'nonzero'")
        pb.tasks.append(t)
    return pb


def load_file(path) -> Problem:
    with open(path, encoding="utf-8") as fh:
        raw = fh.read()
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", position=exc.colno, line=exc.lineno) from None
    return load_problem(data)


# --------------------------------------------------------------------------
# execution


class _Env:
    def __init__(self, pb: Problem, settings: Settings):
        self.pb = pb
        self.settings = settings

    def order(self, task, default=2) -> int:
        v = task.get("order", self.settings.order)
        return default if v is None else v

    def function(self, ref, chart: Chart, where: str) -> SuperPoly:
        if isinstance(ref, str) and ref in self.pb.functions:
            fn = self.pb.functions[ref]
            if fn.chart != chart:
                raise ChartError(f"{where}: function {ref!r} lives on {fn.chart.name}, expected {chart.name}")
            return fn.body
        if ref is None:
            raise ValidationError(f"{where}: missing function")
        return _poly(ref, chart.variables, where)

    def hamiltonian(self, ref, phase: PhaseChart | None, where: str) -> br.Hamiltonian:
        if isinstance(ref, str) and ref in self.pb.hamiltonians:
            H = self.pb.hamiltonians[ref]
            if phase is not None and H.phase != phase:
                raise ChartError(f"{where}: Hamiltonian {ref!r} is not on the expected phase chart")
            return H
        if phase is None:
            raise ValidationError(f"{where}: unknown Hamiltonian {ref!r}")
        return br.Hamiltonian(phase, _poly(ref, phase.variables, where))

    def relation(self, ref, where) -> MicroRelation:
        return _get(self.pb.relations, ref, f"relation in {where}")


def _verdict(d: SuperPoly) -> str:
    return "zero" if d.is_zero() else "nonzero"


def _pullback(env: _Env, t: dict, out: dict):
    rel = env.relation(t.get("relation"), "pullback")
    g = env.function(t.get("function"), rel.target, f"function {t.get('function')!r}")
    N = env.order(t)
    if any(v.kind == "param" for v in g.variables):
        res = pull(rel, g)
    else:
        try:
            res = pullback(rel, g, N)
        except ParityError as exc:
            raise ParityError(f"function {t.get('function')!r}: {exc}") from None
    out["inputs"] = {"relation": text(rel.body), "g": text(g)}
    out["order"] = N
    out["result"] = text(res.f)
    out["pretty"] = f"f = {res.f.pretty()}"
    out["target_map"] = {v.name: text(e) for v, e in res.target_map.items()}
    if res.param is not None:
        out["expansion"] = [text(c) for c in res.expansion_terms()]
    if t.get("as"):
        env.pb.functions[t["as"]] = Function(rel.source, res.f)
    return res.f


def _tangent(env: _Env, t: dict, out: dict):
    rel = env.relation(t.get("relation"), "tangent")
    g = env.function(t.get("function"), rel.target, "function")
    u = env.function(t.get("direction"), rel.target, "direction")
    N = env.order(t)
    r = tangent_pullback(rel, g, u, N)
    out["inputs"] = {"relation": text(rel.body), "g": text(g), "u": text(u)}
    out["order"] = N
    out["result"] = text(r)
    out["pretty"] = r.pretty()
    return r


def _compose(env: _Env, t: dict, out: dict):
    A = env.relation(t.get("first"), "compose")
    B = env.relation(t.get("second"), "compose")
    D = t.get("fiber_cap", env.settings.fiber_cap) or env.order(t, 3)
    C = compose(A, B, D)
    out["inputs"] = {"first": text(A.body), "second": text(B.body)}
    out["fiber_cap"] = D
    out["result"] = text(C.body)
    out["pretty"] = f"S = {C.body.pretty()}"
    if t.get("as"):
        env.pb.relations[t["as"]] = C
    return C.body


def _coords(env: _Env, t: dict, out: dict):
    rel = env.relation(t.get("relation"), "coords")
    cc = _get(env.pb.changes, t.get("change"), "coordinate change")
    D = t.get("fiber_cap", env.settings.fiber_cap) or env.order(t, rel.fiber_cap or 2)
    new = change_target_coords(rel, cc, D, t.get("fibers"))
    out["inputs"] = {"relation": text(rel.body), "change": {v.name: text(e) for v, e in cc.old_in_new.items()}}
    out["fiber_cap"] = D
    out["result"] = text(new.body)
    out["pretty"] = f"S' = {new.body.pretty()}"
    phi_new, coeffs, _ = tensor_law(rel, cc)
    ok = tuple(new.gf.phi) == tuple(phi_new) and all(new.gf.coefficient(i, j) == c for (i, j), c in coeffs.items())
    out["tensor_law"] = "holds" if ok else "fails"
    if t.get("crosscheck"):
        other = legendre_change_target_coords(rel, cc, D, t.get("fibers"))
        diff = other.body - new.body
        out["crosscheck"] = _verdict(diff)
        ok = ok and diff.is_zero()
    out["defect"] = "zero" if ok else "nonzero"
    if t.get("as"):
        env.pb.relations[t["as"]] = new
    return new.body


def _bracket(env: _Env, t: dict, out: dict):
    H = env.hamiltonian(t.get("left"), None, "left")
    F = env.hamiltonian(t.get("right"), H.phase, "right")
    R = br.canonical_poisson(H, F) if H.phase.kind == COTANGENT else br.canonical_schouten(H, F)
    out["inputs"] = {"left": text(H.body), "right": text(F.body), "kind": H.phase.kind}
    out["result"] = text(R.body)
    out["pretty"] = R.body.pretty()
    if t.get("as"):
        env.pb.hamiltonians[t["as"]] = R
    return R.body


def _args(env: _Env, H: br.Hamiltonian, refs) -> list:
    return [env.function(r, H.phase.base, f"argument {k + 1}") for k, r in enumerate(refs or [])]


def _derived(env: _Env, t: dict, out: dict):
    H = env.hamiltonian(t.get("hamiltonian"), None, "hamiltonian")
    args = _args(env, H, t.get("args"))
    method = t.get("method", "nested")
    out["inputs"] = {"hamiltonian": text(H.body), "args": [text(a) for a in args]}
    if method == "direct":
        r = br.derived_bracket_direct(H, args)
    elif method == "nested":
        r = br.derived_bracket_nested(H, args)
    elif method == "both":
        r = br.derived_bracket_nested(H, args)
        d = br.derived_bracket_direct(H, args) - r
        out["defect"] = _verdict(d)
        out["difference"] = text(d)
    else:
        raise ValidationError(f"unknown derived-bracket method {method!r}")
    out["method"] = method
    out["result"] = text(r)
    out["pretty"] = r.pretty()
    return d if method == "both" else r


def _jacobiator(env: _Env, t: dict, out: dict):
    H = env.hamiltonian(t.get("hamiltonian"), None, "hamiltonian")
    args = _args(env, H, t.get("args"))
    J = br.jacobiator(H, args)
    out["inputs"] = {"hamiltonian": text(H.body), "args": [text(a) for a in args]}
    out["result"] = text(J)
    out["defect"] = _verdict(J)
    return J


def _master(env: _Env, t: dict, out: dict):
    H = env.hamiltonian(t.get("hamiltonian"), None, "hamiltonian")
    M = br.master_defect(H).body
    out["inputs"] = {"hamiltonian": text(H.body)}
    out["result"] = text(M)
    out["pretty"] = M.pretty()
    out["defect"] = _verdict(M)
    return M


def _hj(env: _Env, t: dict, out: dict):
    mode = t["mode"]
    out["mode"] = mode
    if mode in ("apply", "commutator", "odd_shift"):
        H = env.hamiltonian(t.get("hamiltonian"), None, "hamiltonian")
        f0 = env.function(t.get("function"), H.phase.base, "function")
        out["inputs"] = {"hamiltonian": text(H.body), "f": text(f0)}
        if mode == "apply":
            r = hj.hj_apply(H, f0)
            out["result"] = text(r)
            out["pretty"] = r.pretty()
            return r
        if mode == "odd_shift":
            tau = Variable("tau", 1, "param", nil=2)
            f = hj.odd_hj_shift_solution(H, f0, tau)
            res = hj.odd_hj_residual(H, f, tau)
            out["result"] = text(f)
            out["residual"] = text(res)
            out["defect"] = _verdict(res)
            return res
        F = env.hamiltonian(t.get("other"), H.phase, "other")
        d = hj.hj_commutator_defect(H, F, f0)
        e = hj.expected_commutator(H, F, f0)
        out["inputs"]["other"] = text(F.body)
        out["result"] = text(d)
        out["pretty"] = d.pretty()
        out["expected"] = text(e)
        out["defect"] = _verdict(d - e)
        return d - e
    rel = env.relation(t.get("relation"), f"hj {mode}")
    H1 = env.hamiltonian(t.get("source_hamiltonian"), rel.source_phase, "source_hamiltonian")
    H2 = env.hamiltonian(t.get("target_hamiltonian"), rel.target_phase, "target_hamiltonian")
    out["inputs"] = {"relation": text(rel.body), "H1": text(H1.body), "H2": text(H2.body)}
    if mode == "related":
        cap = t.get("fiber_cap", env.settings.fiber_cap)
        d = hj.relatedness_defect(rel, H1, H2, cap)
        if cap is not None:
            out["fiber_cap"] = cap
    else:
        g = env.function(t.get("function"), rel.target, "function")
        N = env.order(t)
        out["inputs"]["g"] = text(g)
        out["order"] = N
        d = hj.morphism_defect(rel, H1, H2, g, N, check=bool(t.get("check_related", True)))
    out["result"] = text(d)
    out["defect"] = _verdict(d)
    return d


_RUNNERS = {
    "pullback": _pullback,
    "tangent": _tangent,
    "compose": _compose,
    "coords": _coords,
    "bracket": _bracket,
    "derived": _derived,
    "jacobiator": _jacobiator,
    "master": _master,
    "hj": _hj,
}


def run_task(env: _Env, k: int, t: dict) -> dict:
    out = {"task": k, "op": t["op"]}
    if t.get("name"):
        out["name"] = t["name"]
    start = time.perf_counter()
    value = _RUNNERS[t["op"]](env, t, out)
    if env.settings.timing:
        out["seconds"] = round(time.perf_counter() - start, 4)
    ok = True
    if t.get("assert"):
        out["assert"] = t["assert"]
        if "defect" not in out:
            out["defect"] = _verdict(value)
        ok = out["defect"] == t["assert"]
    if "expect" in t:
        want = _poly(t["expect"], sorted(value.variables, key=lambda v: v.name) + _known_vars(env), f"tasks[{k}].expect")
        out["expect"] = text(want)
        ok = ok and want == value
    if "assert" in t or "expect" in t:
        out["ok"] = ok
    return out


def _known_vars(env: _Env) -> list:
    seen = {}
    for ch in env.pb.charts.values():
        for v in ch.variables:
            seen.setdefault(v.name, v)
    for rel in env.pb.relations.values():
        for v in rel.fibers + rel.source_phase.fibers:
            seen.setdefault(v.name, v)
    for H in env.pb.hamiltonians.values():
        for v in H.phase.variables:
            seen.setdefault(v.name, v)
    return list(seen.values())


def run_problem(pb: Problem, settings: Settings | None = None) -> dict:
    """Execute every task in order; ``report["ok"]`` is False iff an assertion failed."""
    env = _Env(pb, settings or Settings())
    results = [run_task(env, k, t) for k, t in enumerate(pb.tasks)]
    order = [v.name for v in sorted(_known_vars(env))]
    return {"ok": all(r.get("ok", True) for r in results), "tasks": results, "variable_order": order}


def render(report: dict) -> list[str]:
    """Plain-text lines for a report."""
    lines = []
    for r in report["tasks"]:
        head = f"[{r['task']}] {r['op']}" + (f" {r['mode']}" if "mode" in r else "")
        if "name" in r:
            head += f" ({r['name']})"
        lines.append(head)
        if "pretty" in r:
            lines.append(f"  {r['pretty']}")
        lines.append(f"  result: {r['result']}")
        for key in ("expected", "difference", "residual", "tensor_law", "crosscheck", "defect"):
            if key in r:
                lines.append(f"  {key}: {r[key]}")
        if "ok" in r:
            lines.append("  " + ("PASS" if r["ok"] else "FAIL"))
    return lines
