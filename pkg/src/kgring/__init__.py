"""Exact computations with Köhler's Z/2-graded ring 𝔎_p, its tensor products
𝔎_G over square-free G, and finitely generated 𝔎_G-modules over Z[1/m]."""

from kgring.intlinalg import GradedGroup, IntMatrix
from kgring.kernels import BACKEND
from kgring.modules import (
    Extension,
    KGModule,
    ModuleMap,
    direct_sum,
    ext1,
    external_tensor,
    free_module,
    hom,
    suspend,
    validate,
)
from kgring.exactness import brute_force_exactness, is_exact
from kgring.ring import KGRing, RingElement, verify_derived_relations

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Extension",
    "GradedGroup",
    "IntMatrix",
    "KGModule",
    "KGRing",
    "ModuleMap",
    "RingElement",
    "brute_force_exactness",
    "direct_sum",
    "ext1",
    "external_tensor",
    "free_module",
    "hom",
    "is_exact",
    "suspend",
    "validate",
    "verify_derived_relations",
]
