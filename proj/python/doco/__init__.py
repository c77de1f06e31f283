"""Discounted adaptive online learning: FTRL magnitude learners, discounted
OGD baselines, online conformal prediction, and the benchmark harness.

The compiled core lives in ``doco._doco``; everything public is re-exported
here. When running against a build tree (rather than an installed wheel), set
``DOCO_EXT_DIR`` to the directory containing the extension.
"""

import os
import sys

_ext_dir = os.environ.get("DOCO_EXT_DIR")
if _ext_dir and _ext_dir not in sys.path:
    sys.path.insert(0, _ext_dir)

try:
    from _doco import *  # noqa: F401,F403  (build-tree layout)
    from _doco import __doc__ as _core_doc  # noqa: F401
except ImportError:
    from ._doco import *  # noqa: F401,F403  (installed layout)
