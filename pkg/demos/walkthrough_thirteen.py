"""Step through the homology computation for m = 13.

Run with ``python demos/walkthrough_thirteen.py``; it takes about a minute.
"""

from bianchihom.equivss import chain_candidates, compute_all_pages, resolve_extensions
from bianchihom.orbifold import build_gamma_complex, equivariant_euler_characteristic
from bianchihom.reportcli import load_fixture, mass_terms

M = 13

gx = build_gamma_complex(M, load_fixture(M).walls())
print("orbit cells per dimension:", gx.counts())
for dim in range(3):
    print(f"  stabilizers in dimension {dim}:", gx.type_multiset(dim))
print("mass formula:", " + ".join(mass_terms(gx)), "=", equivariant_euler_characteristic(gx))

pages = compute_all_pages(gx, q_max=7)
z = pages["Z"]
print("\nE2 page over Z (rows q = 3..0):")
for q in range(3, -1, -1):
    print(f"  q={q}:", " | ".join(str(z.e2_group(p, q)) for p in range(3)))
print("d2 image classes:", z.d2_images)
print("E3(0,1) =", z.e3[(0, 1)])

pieces = z.filtration_pieces(2)
print("\nE-infinity pieces on the diagonal n = 2:", [str(g) for g in pieces])
cands = chain_candidates(pieces)
print("extension candidates before the coefficient filter:")
for c in cands:
    print("  ", c)

print("\nresolved integral homology:")
for r in resolve_extensions(pages, 7):
    print(f"  H_{r.q} = {r.group}   ({r.status}, {len(r.candidates)} candidate(s))")
