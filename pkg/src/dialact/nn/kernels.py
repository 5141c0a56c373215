"""Backend selection for the convolution hot kernels.

The compiled extension is used when available; set DIALACT_NO_EXT=1 to
force the pure-numpy fallback. Both backends produce bit-identical
forward results (fixed summation order); backward gradients agree to
rounding error.
"""

import os

if os.environ.get("DIALACT_NO_EXT"):
    from . import _conv_np as _impl
else:
    try:
        from . import _conv_cy as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _conv_np as _impl

BACKEND = _impl.BACKEND
conv2d_forward = _impl.conv2d_forward
conv2d_backward = _impl.conv2d_backward
