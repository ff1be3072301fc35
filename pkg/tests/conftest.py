"""Pytest configuration.

The toolkit is imported as `src.*` straight from the checkout, so the repository
root goes on `sys.path` before any test module is collected. Long-running
sweeps are marked `slow` (see pytest.ini) and only run with `-m slow`.
"""

from __future__ import annotations

import sys
from pathlib import Path


REPO_ROOT = Path(__file__).resolve().parents[1]
if str(REPO_ROOT) not in sys.path:
    sys.path.insert(0, str(REPO_ROOT))
