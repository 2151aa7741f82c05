"""Exact integral homology of the Bianchi groups PSL2(O_-m)."""

from .abelianlin import FgAbelianGroup, chain_homology, smith_normal_form
from .equivss import SpectralPages, integral_homology, resolve_extensions
from .orbifold import GammaComplex, Wall, build_gamma_complex, equivariant_euler_characteristic
from .quadring import RingSpec
from .swanfloor import compute_floor

__all__ = [
    "FgAbelianGroup",
    "GammaComplex",
    "RingSpec",
    "SpectralPages",
    "Wall",
    "build_gamma_complex",
    "chain_homology",
    "compute_floor",
    "equivariant_euler_characteristic",
    "integral_homology",
    "resolve_extensions",
    "smith_normal_form",
]
