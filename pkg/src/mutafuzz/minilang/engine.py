"""Selects the execution engine at import time.

Prefers the compiled extension built from _vm.py (see setup.py); falls back
to the interpreted module when the extension is missing. Set MUTAFUZZ_PURE=1
to force the pure-Python engine, e.g. for benchmarking or debugging.
"""

from __future__ import annotations

import os

if os.environ.get("MUTAFUZZ_PURE"):
    from . import _vm as _impl

    BACKEND = "pure"
else:
    try:
        from . import _vm_compiled as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        from . import _vm as _impl  # type: ignore[no-redef]

        BACKEND = "pure"

run_vm = _impl.run_vm
