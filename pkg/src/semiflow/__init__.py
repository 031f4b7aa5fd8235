"""Finite-dimensional operator semigroups, their resolvents and executable checks."""
from .matrix_core import *  # noqa: F401,F403
from .operator_space import *  # noqa: F401,F403
from .quantum_maps import *  # noqa: F401,F403
from .report import VerificationReport  # noqa: F401
from .semigroup import *  # noqa: F401,F403
from .weak_integration import *  # noqa: F401,F403
from .resolvent import *  # noqa: F401,F403

__version__ = "0.1.0"
