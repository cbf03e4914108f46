"""Randomized property suites behind ``microformal verify``.

Each property is run on ``count`` independent instances.  Instance ``i`` of
property ``name`` in suite ``suite`` draws from ``Random(f"{seed}:{suite}:{name}:{i}")``
so a report depends only on the seed and the sizes, never on run order.
"""
from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from typing import Callable

from . import checks as C
from .brackets import Hamiltonian
from .geometry import ANTICOTANGENT, COTANGENT, Chart, build_phase_chart
from .hamjac import hj_commutator_defect
from .relations import EVEN_KIND, ODD_KIND

SUITE_NAMES = ("pullback", "functorial", "coords", "brackets", "hamjac", "odd")


@dataclass(frozen=True)
class Property:
    name: str
    check: Callable[[random.Random], C.Outcome]
    count: int
    asserted: bool = True
    description: str = ""


@dataclass
class PropertyResult:
    suite: str
    name: str
    instances: int
    failures: int
    skipped: int
    asserted: bool
    counterexample: dict | None = None
    seconds: float | None = None

    @property
    def ok(self) -> bool:
        return self.failures == 0 or not self.asserted

    def as_dict(self) -> dict:
        d = {
            "suite": self.suite,
            "property": self.name,
            "instances": self.instances,
            "failures": self.failures,
            "skipped": self.skipped,
            "asserted": self.asserted,
            "ok": self.ok,
            "counterexample": self.counterexample,
        }
        if self.seconds is not None:
            d["seconds"] = round(self.seconds, 3)
        return d


@dataclass
class SuiteReport:
    suite: str
    seed: int
    scale: float
    results: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.results)

    def first_failure(self) -> PropertyResult | None:
        return next((r for r in self.results if not r.ok), None)

    def as_dict(self) -> dict:
        return {
            "suite": self.suite,
            "seed": self.seed,
            "scale": self.scale,
            "ok": self.ok,
            "notes": list(self.notes),
            "properties": [r.as_dict() for r in self.results],
        }

    def lines(self) -> list[str]:
        out = [f"# verify {self.suite} seed={self.seed} scale={self.scale}"]
        out.extend(self.notes)
        for r in self.results:
            if not r.asserted:
                tag = "INFO"
            else:
                tag = "PASS" if r.ok else "FAIL"
            line = f"{tag} {r.suite}.{r.name}: {r.instances - r.failures - r.skipped}/{r.instances - r.skipped} hold"
            if r.skipped:
                line += f" ({r.skipped} skipped)"
            if r.seconds is not None:
                line += f" [{r.seconds:.2f}s]"
            out.append(line)
            if r.counterexample and (r.asserted or r.failures):
                for k, v in r.counterexample.items():
                    out.append(f"    {k}: {v}")
        out.append("OK" if self.ok else "FAILED")
        return out


# --------------------------------------------------------------------------
# suite tables


def _fixed(fn):
    return lambda rng: fn()


def _master_jacobi(rng):
    idx = rng.randrange(10)
    return C.jacobi_vanishing(rng, C.master_family(rng, idx))


def _pullback():
    return [
        Property("zero_image", C.zero_image, 50),
        Property("linear_law", lambda r: C.linear_law(r, EVEN_KIND), 50),
        Property("quadratic_law", lambda r: C.quadratic_law(r, EVEN_KIND), 20),
        Property("derivative_theorem", C.derivative_theorem, 50),
        Property("truncation_coherence", C.truncation_coherence, 20),
        Property("parity", C.parity_preserved, 20),
    ]


def _functorial():
    return [
        Property("functoriality", C.functoriality, 20),
        Property("map_composition", _fixed(C.map_composition_example), 1),
    ]


def _coords():
    return [
        Property("tensor_law_linear", lambda r: C.tensor_law_check(r, quadratic=False), 20),
        Property("tensor_law_quadratic", lambda r: C.tensor_law_check(r, quadratic=True), 10),
        Property("coherence_linear", lambda r: C.coordinate_coherence(r, quadratic=False), 20),
        Property("coherence_quadratic", lambda r: C.coordinate_coherence(r, quadratic=True), 10),
        Property("legendre_agreement", C.legendre_agreement, 10),
        Property("formal_inverse", C.formal_inverse_roundtrip, 20),
        Property("momentum_degree", C.momentum_pairing, 20),
    ]


def _brackets():
    return [
        Property("canonical_jacobi", C.bracket_jacobi, 30),
        Property("nested_direct", C.nested_direct, 100),
        Property("derived_symmetry", C.derived_symmetry, 30),
        Property("derived_leibniz", C.derived_leibniz, 30),
        Property("master_jacobiators", _master_jacobi, 10),
        Property("mutant_witness", _fixed(C.mutated_witness), 1),
    ]


def _hamjac():
    return [
        Property("commutator_cotangent", lambda r: C.commutator(r, COTANGENT), 50),
        Property("commutator_anticotangent", lambda r: C.commutator(r, ANTICOTANGENT), 50),
        Property("constant_invariance", C.hj_constant_invariance, 20),
        Property("odd_shift", lambda r: C.odd_shift(r, r.randrange(6)), 6),
        Property("morphism_map_family", C.morphism_map_family, 10),
        Property("morphism_fiber_linear", C.morphism_fiber_linear_family, 10),
        Property("classical_relatedness", C.classical_relatedness, 20),
        Property("sign_times_schouten", C.literal_sign_commutator, 20, asserted=False,
                 description="defect = (-1)^H X_[[H,F]][f0]; reported only"),
    ]


def _odd():
    return [
        Property("linear_law", lambda r: C.linear_law(r, ODD_KIND), 50),
        Property("quadratic_law", C.odd_second_order, 20),
        Property("target_map_phi2", C.odd_phi2, 10),
    ]


SUITES = {
    "pullback": _pullback,
    "functorial": _functorial,
    "coords": _coords,
    "brackets": _brackets,
    "hamjac": _hamjac,
    "odd": _odd,
}


def properties(suite: str) -> list[Property]:
    if suite not in SUITES:
        raise KeyError(f"unknown suite {suite!r}; choose from {', '.join(SUITE_NAMES + ('all',))}")
    return SUITES[suite]()


# --------------------------------------------------------------------------
# running


def commutator_example() -> str:
    """Commutator defect for H = p^2, F = x^2, f0 = x^3."""
    ph = build_phase_chart(Chart.make("M", ["x"]), COTANGENT)
    d = hj_commutator_defect(Hamiltonian(ph, "p_x^2"), Hamiltonian(ph, "x^2"), "x^3")
    return d.pretty()


def run_property(suite: str, prop: Property, seed: int, scale: float = 1.0, timing: bool = False) -> PropertyResult:
    n = max(1, round(prop.count * scale))
    failures = skipped = 0
    witness = None
    start = time.perf_counter()
    for i in range(n):
        rng = random.Random(f"{seed}:{suite}:{prop.name}:{i}")
        try:
            out = prop.check(rng)
        except Exception as exc:  # an exception is a counterexample too
            out = C.Outcome(False, {"error": f"{type(exc).__name__}: {exc}"})
        if out.skipped:
            skipped += 1
        elif not out.ok:
            failures += 1
            if witness is None:
                witness = {"instance": str(i), **out.witness}
    elapsed = time.perf_counter() - start
    return PropertyResult(suite, prop.name, n, failures, skipped, prop.asserted, witness,
                          elapsed if timing else None)


def verify(suite: str = "all", seed: int = 0, scale: float = 1.0, timing: bool = False) -> SuiteReport:
    names = SUITE_NAMES if suite == "all" else (suite,)
    for s in names:
        properties(s)  # validates the name
    report = SuiteReport(suite, seed, scale)
    for s in names:
        if s == "hamjac":
            report.notes.append(f"commutator defect for H = p², F = x², f₀ = x³: {commutator_example()}")
        for prop in properties(s):
            report.results.append(run_property(s, prop, seed, scale, timing))
    return report
