# src/services/__init__.py
"""
Services package for wittkit

This package contains the computation services:
- GammaLattice / ScalarField: exact scalars, the lattice Γ, its order and scale maps
- LieService: brackets of W(Γ), its central extension, the Witt-type algebra and subquotients
- CompletionService: brackets of per-degree truncated level series
- LinearAlgebraService / SparseEchelon: exact ranks, nullspaces and conflict certificates
- StructureService: ideals, ad-probes, nested brackets and subquotients
- DerivationService: Leibniz checks and the decomposition D = ad_y + D_φ
- AutomorphismService: φ_{τ,c} and its group law
- CohomologyService: 2-cocycles, normalization and the coboundary fit
- ExpressionService: the element expression language
- SerializationService / StorageService: JSON documents and reports
"""

from .gamma_service import GammaLattice, GroupElement, ScaleMap, ScalarField
from .lie_service import BasisIndex, BracketRule, Element, LieService, Window, WGAMMA, WGAMMA_HAT, WITT_TYPE
from .completion_service import CompletionElement, CompletionService
from .linalg_service import LinearAlgebraService, SparseEchelon
from .structure_service import IdealReport, StructureService
from .derivation_service import AdditiveMap, DecompositionResult, DerivationService, DerivationSpec
from .automorphism_service import AutElement, AutomorphismService, Character
from .cohomology_service import CohomologyService, LinearFunctional, NormalizationResult
from .expression_service import ExpressionService
from .serialization_service import SerializationService
from .storage_service import StorageService

__all__ = [
    'GammaLattice',
    'GroupElement',
    'ScaleMap',
    'ScalarField',
    'BasisIndex',
    'BracketRule',
    'Element',
    'LieService',
    'Window',
    'WGAMMA',
    'WGAMMA_HAT',
    'WITT_TYPE',
    'CompletionElement',
    'CompletionService',
    'LinearAlgebraService',
    'SparseEchelon',
    'IdealReport',
    'StructureService',
    'AdditiveMap',
    'DecompositionResult',
    'DerivationService',
    'DerivationSpec',
    'AutElement',
    'AutomorphismService',
    'Character',
    'CohomologyService',
    'LinearFunctional',
    'NormalizationResult',
    'ExpressionService',
    'SerializationService',
    'StorageService',
]

__version__ = '0.1.0'
