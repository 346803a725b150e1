"""Backend selection for the search kernels.

The compiled extension is used when it imports; otherwise, or when
``PARAPLAN_PURE_PYTHON=1`` is set, the pure-Python twin is used. Both expose
``CompiledTask``, ``Evaluator``, ``INFINITE`` and ``HEURISTICS``.
"""

import os

from . import _pykernels

BACKEND = "python"

if os.environ.get("PARAPLAN_PURE_PYTHON", "") not in ("", "0"):
    from ._pykernels import HEURISTICS, INFINITE, CompiledTask, Evaluator
else:
    try:
        from ._kernels import HEURISTICS, INFINITE, CompiledTask, Evaluator

        BACKEND = "cython"
    except ImportError:  # extension not built
        from ._pykernels import HEURISTICS, INFINITE, CompiledTask, Evaluator


def backends():
    """Available kernel modules keyed by name, compiled first."""
    found = {}
    try:
        from . import _kernels

        found["cython"] = _kernels
    except ImportError:
        pass
    found["python"] = _pykernels
    return found
