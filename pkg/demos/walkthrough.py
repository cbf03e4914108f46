"""A short tour: a nonlinear pullback, a commutator of shifts, a broken master Hamiltonian."""
from __future__ import annotations

from microformal import brackets as br
from microformal.geometry import COTANGENT, Chart, build_phase_chart
from microformal.hamjac import expected_commutator, hj_commutator_defect
from microformal.relations import MicroRelation, pullback
from microformal.checks import mutated_witness


def main():
    M1, M2 = Chart.make("M1", ["x"]), Chart.make("M2", ["y"])
    rel = MicroRelation(build_phase_chart(M1, COTANGENT, ["p"]), build_phase_chart(M2, COTANGENT, ["q"]),
                        "x*q + 1/2*q^2")
    res = pullback(rel, "y^2", 2)
    print("pullback of y^2 along S = xq + q^2/2:", res.f.pretty())
    print("  target map:", {str(k): str(v) for k, v in res.target_map.items()})

    ph = build_phase_chart(M1, COTANGENT, ["p"])
    H, F = br.Hamiltonian(ph, "p^2"), br.Hamiltonian(ph, "x^2")
    print("commutator defect of p^2, x^2 on x^3:", hj_commutator_defect(H, F, "x^3").pretty())
    print("  minus the bracket shift:        ", expected_commutator(H, F, "x^3").pretty())

    out = mutated_witness()
    print("broken Hamiltonian", out.witness["H"], "master defect", out.witness["defect"])
    print("  Jacobiator witness J_%s(%s) = %s" % (out.witness["n"], out.witness["args"], out.witness["J"]))


if __name__ == "__main__":
    main()
