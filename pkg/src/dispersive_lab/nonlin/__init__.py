from .poly import Var, Monomial, PolyExpr, SLOTS
from .spec import NonlinearitySpec, SpecError
from .dsl import ParseError, parse_spec, load_spec, format_spec
from .validate import ValidationReport, validate_structure
from .evaluate import evaluate, compile_spec
from .builtins import builtin, builtin_4shro, builtin_wzy, builtin_grassmannian, BUILTINS
