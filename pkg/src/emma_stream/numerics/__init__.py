"""Dense matrix primitives and a minimal reverse-mode differentiation tape."""

from . import matrix
from .checks import central_difference_gradient, finite_diff_check
from .tape import Node, Tape

__all__ = [
    "matrix",
    "Node",
    "Tape",
    "central_difference_gradient",
    "finite_diff_check",
]
