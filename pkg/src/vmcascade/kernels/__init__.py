"""Hot evaluation kernels; numba or numpy per ``vmcascade._accel.BACKEND``."""
from .._accel import BACKEND, USE_NUMBA

if USE_NUMBA:
    from ._numba_impl import (broadcast_lossless_terms, cascade_lossless_terms, cascade_terms,
                              cr_terms, switching_grid)
else:
    from ._numpy_impl import (broadcast_lossless_terms, cascade_lossless_terms, cascade_terms,
                              cr_terms, switching_grid)

__all__ = ["BACKEND", "broadcast_lossless_terms", "cascade_lossless_terms", "cascade_terms",
           "cr_terms", "switching_grid"]
