"""Exact polarization-adapted Fedosov star product on a Darboux chart, with the leaf module."""
from .connection import ConnectionSpec, InvalidConnection, curvature_gamma, nabla, validate_connection
from .fedosov import (
    EngineConfig,
    FedosovState,
    NonConvergence,
    Series,
    build_state,
    fedosov_D,
    flat_star_oracle,
    module_action,
    q_inverse,
    q_map,
    solve_r,
    star,
)
from .ideals import LeafSpec, in_ideal_I, is_in_Ifin, reduce_mod_Ifin
from .koszul import delta, delta_inv, tau
from .parse import ParseError, parse_expression, render_poly
from .ring import BasePoly, Rational, as_rational
from .weyl import ChartContext, WeylForm, circ, filtration_degree, graded_commutator, pbw_oracle

__all__ = [
    "BasePoly",
    "ChartContext",
    "ConnectionSpec",
    "EngineConfig",
    "FedosovState",
    "InvalidConnection",
    "LeafSpec",
    "NonConvergence",
    "ParseError",
    "Rational",
    "Series",
    "WeylForm",
    "as_rational",
    "build_state",
    "circ",
    "curvature_gamma",
    "delta",
    "delta_inv",
    "fedosov_D",
    "filtration_degree",
    "flat_star_oracle",
    "graded_commutator",
    "in_ideal_I",
    "is_in_Ifin",
    "module_action",
    "nabla",
    "parse_expression",
    "pbw_oracle",
    "q_inverse",
    "q_map",
    "reduce_mod_Ifin",
    "render_poly",
    "solve_r",
    "star",
    "tau",
    "validate_connection",
]
