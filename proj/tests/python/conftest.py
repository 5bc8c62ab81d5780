import os
import sys
from pathlib import Path

# Build-tree layout: the extension lands in <repo>/build and the pure-python
# package lives in <repo>/python. Installed layouts need neither path.
# GWQ_PYEXT_DIR overrides the extension directory (set by ctest).
_repo = Path(__file__).resolve().parents[2]
_ext = os.environ.get("GWQ_PYEXT_DIR", "")
for p in (Path(_ext) if _ext else None, _repo / "build", _repo / "python"):
    if p is not None and p.is_dir() and str(p) not in sys.path:
        sys.path.insert(0, str(p))
