"""
Transversal Modules
"""

from .errors import InputError, TransversalError
from .algebra import INFINITY, Moebius, Poly
from .ratmap import RatMap, critical_set
from .relations import CriticalRelation, OrbitModel, build_proper
from .qdiff import QuadDiff, q_relation
from .transversality import certify, jacobian
from .lattes import degeneracy_demo, flexible_lattes
from .mapspec import load_spec

__all__ = [
    'InputError',
    'TransversalError',
    'INFINITY',
    'Moebius',
    'Poly',
    'RatMap',
    'critical_set',
    'CriticalRelation',
    'OrbitModel',
    'build_proper',
    'QuadDiff',
    'q_relation',
    'certify',
    'jacobian',
    'degeneracy_demo',
    'flexible_lattes',
    'load_spec',
]
