"""tagcalc: symbolic rewriting for tagged vector spaces in Dirac notation, with a numeric backend."""

from .coeff import Coeff
from .errors import (
    DivergenceError, ParseError, ShapeError, ShapeParseError, TagcalcError, UnregisteredPairing,
    UnsupportedFeature,
)
from .expr import Expr, Term, adjoint, alpha_normalize, structural_eq, substitute
from .basis import BasisTable, default_table
from .rewrite import NormalizeReport, normalize, trace
from .dsl import parse, print_expr
from .ops import Bra, Ket, Operator, identity, moment, qhat, phat, ahat, adag, ket, bra, delta_hat
from .derivations import DERIVATIONS, commutator, run_derivation, weyl_symbol, weyl_quantize

__version__ = "0.1.0"

__all__ = [
    "Coeff", "Expr", "Term", "BasisTable", "default_table", "NormalizeReport",
    "normalize", "trace", "parse", "print_expr", "adjoint", "alpha_normalize", "structural_eq",
    "substitute", "identity", "moment", "qhat", "phat", "ahat", "adag", "ket", "bra", "delta_hat",
    "Ket", "Bra", "Operator", "commutator", "weyl_symbol", "weyl_quantize", "run_derivation",
    "DERIVATIONS", "TagcalcError", "ParseError", "ShapeError", "ShapeParseError", "DivergenceError",
    "UnregisteredPairing", "UnsupportedFeature",
]
