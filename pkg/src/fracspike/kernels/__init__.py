"""Hot pointwise kernels with a compiled core and a numpy fallback.

The Cython extension is optional: if it failed to build (or if
FRACSPIKE_PURE_PYTHON is set) the numpy reference backend is used instead.
Both expose the same functions with identical semantics.
"""

import os

if os.environ.get("FRACSPIKE_PURE_PYTHON"):
    from fracspike.kernels import _ref as _impl
else:
    try:
        from fracspike.kernels import _corekern as _impl  # type: ignore[attr-defined]
    except ImportError:
        from fracspike.kernels import _ref as _impl

BACKEND = _impl.BACKEND
rho_field_1d = _impl.rho_field_1d
rho_field_2d = _impl.rho_field_2d
positive_power = _impl.positive_power
nonlinear_remainder = _impl.nonlinear_remainder
ansatz_error = _impl.ansatz_error
local_maxima_1d = _impl.local_maxima_1d
local_maxima_2d = _impl.local_maxima_2d
radial_bin = _impl.radial_bin

__all__ = [
    "BACKEND",
    "rho_field_1d",
    "rho_field_2d",
    "positive_power",
    "nonlinear_remainder",
    "ansatz_error",
    "local_maxima_1d",
    "local_maxima_2d",
    "radial_bin",
]
