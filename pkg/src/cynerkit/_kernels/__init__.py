"""Tag-sequence kernels with a compiled fast path.

Imports the Cython extension when it was built, otherwise the pure-Python
twin. Set CYNERKIT_PURE_PYTHON=1 to force the fallback (used by the parity
tests and the benchmark).
"""

import os

from . import _pykernels

if os.environ.get("CYNERKIT_PURE_PYTHON"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

MALFORMED = _impl.MALFORMED
ORPHAN_INSIDE = _impl.ORPHAN_INSIDE
LABEL_MISMATCH = _impl.LABEL_MISMATCH

tag_label = _impl.tag_label
is_wellformed = _impl.is_wellformed
bio2_violations = _impl.bio2_violations
bio2_repair = _impl.bio2_repair
decode_spans = _impl.decode_spans
encode_spans = _impl.encode_spans
