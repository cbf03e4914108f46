"""Exact computations with formal canonical relations on supermanifolds.

The package is layered: ``superalg`` (supercommutative polynomials),
``geometry`` (charts, phase charts, coordinate changes), ``relations``
(generating functions, nonlinear pullbacks, composition), ``brackets``
(canonical and higher derived brackets), ``hamjac`` (Hamilton-Jacobi
shifts), and the ``cli`` front end.
"""
from __future__ import annotations

from .brackets import (
    Hamiltonian,
    canonical_bracket,
    canonical_poisson,
    canonical_schouten,
    derived_bracket_direct,
    derived_bracket_nested,
    jacobiator,
    master_defect,
    poisson_bracket,
    schouten_bracket,
)
from .errors import ChartError, MicroformalError, NonFormalError, ParityError, ParseError, SingularError
from .geometry import (
    ANTICOTANGENT,
    COTANGENT,
    Chart,
    CoordinateChange,
    PhaseChart,
    build_phase_chart,
    formal_inverse,
)
from .hamjac import (
    HJField,
    expected_commutator,
    hj_apply,
    hj_commutator_defect,
    hj_shift,
    morphism_defect,
    odd_hj_residual,
    odd_hj_shift_solution,
    related_hamiltonian,
    relatedness_defect,
)
from .relations import (
    EVEN_KIND,
    ODD_KIND,
    GeneratingFunction,
    MicroRelation,
    PullbackResult,
    change_target_coords,
    compose,
    expansion_terms,
    graded_param,
    identity_relation,
    legendre_change_target_coords,
    pull,
    pullback,
    relation_from_map,
    tangent_pullback,
    tensor_law,
)
from .superalg import SuperPoly, Variable, parse_poly

__version__ = "0.1.0"
