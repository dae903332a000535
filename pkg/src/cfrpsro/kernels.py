"""Backend selection for the hot kernels.

The compiled extension is used when it was built; otherwise, or when
``CFRPSRO_PURE_PYTHON`` is set to a non-empty value, the numpy fallback is
used. Both expose the same functions.
"""

import os

from cfrpsro import _pykernels

if os.environ.get("CFRPSRO_PURE_PYTHON"):
  _impl = _pykernels
else:
  try:
    from cfrpsro import _ckernels as _impl
  except ImportError:
    _impl = _pykernels

BACKEND = "python" if _impl is _pykernels else "cython"

reach_probabilities = _impl.reach_probabilities
node_values = _impl.node_values
cfr_regrets = _impl.cfr_regrets
best_response = _impl.best_response
hybrid_orm_2p = _impl.hybrid_orm_2p
own_infoset_reach = _pykernels.own_infoset_reach
TIE_TOLERANCE = _pykernels.TIE_TOLERANCE
