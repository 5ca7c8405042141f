"""Backend selection for the state-vector hot loops.

The compiled Cython module is used when it was built; otherwise, or when
``QITESIM_PURE=1`` is set, the numpy implementation is used. Both expose
``apply_rotations``, ``pauli_columns``, ``pauli_expectations`` and the
real-state variants ``apply_rotations_real`` and ``pauli_columns_real``,
plus ``apply_pauli_sum`` and ``rotation_schedule`` for circuit resource counts.
"""

import os

from . import _pykernels

try:
    if os.environ.get("QITESIM_PURE") == "1":
        raise ImportError("pure backend requested")
    from . import _ckernels as _backend

    BACKEND = "cython"
except ImportError:
    _backend = _pykernels
    BACKEND = "numpy"

apply_rotations = _backend.apply_rotations
pauli_columns = _backend.pauli_columns
pauli_expectations = _backend.pauli_expectations
apply_rotations_real = _backend.apply_rotations_real
pauli_columns_real = _backend.pauli_columns_real
rotation_schedule = _backend.rotation_schedule
apply_pauli_sum = _backend.apply_pauli_sum


def available_backends():
    """Map of backend name to kernel module, compiled first when present."""
    out = {}
    try:
        from . import _ckernels

        out["cython"] = _ckernels
    except ImportError:
        pass
    out["numpy"] = _pykernels
    return out
