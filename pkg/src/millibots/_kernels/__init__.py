"""Step-kernel backend selection.

The compiled Cython kernel is used when importable; otherwise the pure
Python reference takes over. Set MILLIBOTS_FORCE_PY=1 to insist on the
fallback (the benchmark and equivalence tests do this).
"""

import os

from . import reference

BACKEND = "python"
step_kernel = reference.step_kernel

if not os.environ.get("MILLIBOTS_FORCE_PY"):
    try:
        from . import _step

        step_kernel = _step.step_kernel
        BACKEND = "compiled"
    except ImportError:
        pass


def get_backends() -> dict:
    """All importable backends, keyed by name."""
    backends = {"python": reference.step_kernel}
    try:
        from . import _step

        backends["compiled"] = _step.step_kernel
    except ImportError:
        pass
    return backends
