"""Hard parity benchmarks (rPar, rAddPar), their graphs, treewidth and DRAT proofs."""

from .cnf import CnfFormula, brute_force_sat, parse_dimacs, write_dimacs, xor_clauses
from .parity import ParityConstraint, encode_parity, gen_raddpar, gen_rpar
from .proofkit import DratProof, check_drat, parse_drat, write_drat

__version__ = "0.1.0"

__all__ = [
    "CnfFormula", "brute_force_sat", "parse_dimacs", "write_dimacs", "xor_clauses",
    "ParityConstraint", "encode_parity", "gen_raddpar", "gen_rpar",
    "DratProof", "check_drat", "parse_drat", "write_drat",
]
