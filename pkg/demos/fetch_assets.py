"""Check for the external benchmark meshes.

The benchmark meshes (Homer and the others) are not redistributed here.
Place a triangle mesh and its region in ``assets/`` to enable the
benchmark checks::

    assets/homer.off          (or .obj / .ply, ASCII, triangles only)
    assets/homer_region.json  {"vertices": [0-based indices]}

``MESHWAV_ASSETS`` points the acceptance suite at another directory.
"""

import os
import sys
from pathlib import Path

root = Path(os.environ.get("MESHWAV_ASSETS", Path(__file__).resolve().parent.parent / "assets"))
meshes = [root / f"homer.{ext}" for ext in ("off", "obj", "ply")]
found = [p for p in meshes if p.is_file()]
region = root / "homer_region.json"

print(f"asset directory: {root}")
print(f"  mesh:   {found[0] if found else 'missing'}")
print(f"  region: {region if region.is_file() else 'missing'}")
if not found or not region.is_file():
    print("Homer criteria will be reported as SKIP.")
    sys.exit(1)
