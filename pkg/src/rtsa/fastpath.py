"""Backend selection for the episode rollout kernel.

Prefers the compiled extension; falls back to the pure-Python twin when the
extension is missing or when ``RTSA_PURE_PYTHON`` is set in the environment.
Both backends implement identical arithmetic (see tests/test_fastpath.py).
"""

from __future__ import annotations

import os

from ._rollout_py import (  # noqa: F401  (re-exported constants)
    OUTCOME_COMPLETED,
    OUTCOME_EXITED,
    OUTCOME_GROUNDED,
    OUTCOME_TIMEOUT,
    POLICY_BASELINE,
    POLICY_NOMINAL,
    POLICY_WEIGHTS,
)
from ._rollout_py import rollout as rollout_python

if os.environ.get("RTSA_PURE_PYTHON"):
    rollout = rollout_python
    BACKEND = "python"
else:
    try:
        from ._rollout_cy import rollout as rollout_compiled

        rollout = rollout_compiled
        BACKEND = "cython"
    except ImportError:
        rollout = rollout_python
        BACKEND = "python"
