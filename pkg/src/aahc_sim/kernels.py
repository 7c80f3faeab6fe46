"""Backend selection for the hot numerical kernels.

The compiled extension is used when it has been built; otherwise the
pure-Python module is loaded. Set ``AAHC_SIM_PURE=1`` to force the fallback.
"""

import os

from . import _purepy

if os.environ.get("AAHC_SIM_PURE", "") not in ("", "0"):
    _impl = _purepy
else:
    try:
        from . import _kernels as _impl
    except ImportError:  # extension not built
        _impl = _purepy

BACKEND = "compiled" if _impl is not _purepy else "python"

ul_rates = _impl.ul_rates
dl_rates = _impl.dl_rates
gae = _impl.gae
