"""Exact cake cutting: mechanisms, fairness audits and manipulation certificates."""

from .allocation import Allocation, AuditReport, Piece, audit, complement
from .gadget import GadgetReport, GadgetState, build_instances, final_inequality_check, run_gadget
from .mechanisms import (
    MechanismId,
    connected_prop,
    cut_and_choose,
    even_paz,
    moving_knife,
    rotating_ef,
    simple_ef,
)
from .strategy import DeviationCertificate, Scenario, Verdict, brute_force_best_response, classify_deviation
from .valuation import PiecewiseConstant, cut, discontinuities, ell, evaluate, integrate, mark_points, rr

__all__ = [
    "Allocation",
    "AuditReport",
    "DeviationCertificate",
    "GadgetReport",
    "GadgetState",
    "MechanismId",
    "PiecewiseConstant",
    "Piece",
    "Scenario",
    "Verdict",
    "audit",
    "brute_force_best_response",
    "build_instances",
    "classify_deviation",
    "complement",
    "connected_prop",
    "cut",
    "cut_and_choose",
    "discontinuities",
    "ell",
    "evaluate",
    "even_paz",
    "final_inequality_check",
    "integrate",
    "mark_points",
    "moving_knife",
    "rotating_ef",
    "rr",
    "run_gadget",
    "simple_ef",
]
