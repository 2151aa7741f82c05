"""Print singular points and the floor cells for each non-principal m, and export the floor meshes.

Usage: python demos/compare_floors.py [output-dir]
"""

import sys
from pathlib import Path

from bianchihom.quadring import RingSpec, class_group_order
from bianchihom.swanfloor import compute_floor, extract_cells, singular_points

out = Path(sys.argv[1]) if len(sys.argv) > 1 else None
for m in (5, 6, 10, 13, 15):
    ring = RingSpec(m)
    floor = compute_floor(ring)
    cells = extract_cells(floor)
    cusps = ", ".join(f"{s.x} + {s.y}*sqrt(-{m})" for s in singular_points(ring))
    print(f"m = {m}: class number {class_group_order(ring)}, singular cusps: {cusps}")
    print(f"  floor cells in one period: {len(cells.vertices)} vertices, {len(cells.edges)} edges, {len(cells.faces)} faces")
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / f"floor_m{m}.obj").write_text(cells.to_obj())
