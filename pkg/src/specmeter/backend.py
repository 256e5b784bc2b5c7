"""Eigensolver backend selection.

The compiled extension is preferred when importable; otherwise the pure
NumPy twin is used. ``SPECMETER_BACKEND=python`` or ``=compiled`` forces
the choice (the latter raises if the extension was never built).
"""

import os

from . import _kernels_py

try:
    from . import _kernels  # type: ignore[attr-defined]
except ImportError:
    _kernels = None

_forced = os.environ.get("SPECMETER_BACKEND", "").strip().lower()
if _forced == "python":
    _impl = _kernels_py
elif _forced == "compiled":
    if _kernels is None:
        raise ImportError(
            "SPECMETER_BACKEND=compiled but the specmeter._kernels extension "
            "is not built; run 'pip install -e . --no-build-isolation'"
        )
    _impl = _kernels
elif _forced:
    raise ImportError("unknown SPECMETER_BACKEND value: %r" % _forced)
else:
    _impl = _kernels if _kernels is not None else _kernels_py

BACKEND = "compiled" if _impl.COMPILED else "python"
HAVE_COMPILED = _kernels is not None

tridiagonalize = _impl.tridiagonalize
tql_eigenvalues = _impl.tql_eigenvalues


def available_backends():
    """Names of the kernel implementations importable in this install."""
    return ("compiled", "python") if HAVE_COMPILED else ("python",)


def get_kernels(name):
    """Fetch a kernel module by name ('compiled' or 'python')."""
    if name == "python":
        return _kernels_py
    if name == "compiled":
        if _kernels is None:
            raise ValueError("compiled kernels not built")
        return _kernels
    raise ValueError("unknown backend %r" % name)
