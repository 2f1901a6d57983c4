"""Two-party Bell polytopes: exact facets, symmetry classes, catalogue families
and quantum violations."""

from .catalog import FamilyId, emit, identify, make, parse
from .errors import BellscopeError
from .polytope import FacetCertificate, Inequality, enumerate_facets, is_facet, lhv_bound
from .scenario import CGVector, Scenario
from .symmetry import canonical_form, classify_orbits, equivalent

__version__ = "0.1.0"

__all__ = [
    "BellscopeError", "CGVector", "FacetCertificate", "FamilyId", "Inequality", "Scenario",
    "canonical_form", "classify_orbits", "emit", "enumerate_facets", "equivalent", "identify",
    "is_facet", "lhv_bound", "make", "parse",
]
