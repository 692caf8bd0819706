"""
Map Spec Module
Parse map specifications, named fixtures and assemble JSON reports
"""

import json
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from .algebra import Moebius, Poly, is_infinite
from .config import Settings
from .errors import InputError
from .lattes import LattesMap, flexible_lattes
from .ratmap import RatMap
from .relations import CriticalRelation, OrbitModel

logger = logging.getLogger(__name__)

SCHEMA = "transversal-report/1"

# Orbit diagram with nine critical points and zeta = 3
FIG1_MODEL = {
    'nu': 9,
    'generators': [
        [2, 1, 1, 2], [3, 1, 4, 1], [4, 6, 3, 0],
        [5, 6, 4, 0], [8, 7, 4, 1], [9, 8, 1, 1],
    ],
    'landings': [],
}

POLYNOMIAL_FIXTURES = {
    'chebyshev2': (-2, 0, 1),
    'misiurewicz_i': (1j, 0, 1),
}


def parse_complex(value: Any) -> complex:
    """
    Complex number from [re, im], a number, or a string using i or j

    Examples: "2+0.5i", "-1+i", "3", "inf"
    """
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise InputError(f"complex pair must have two entries: {value!r}")
        try:
            return complex(float(value[0]), float(value[1]))
        except (TypeError, ValueError):
            raise InputError(f"complex pair must hold two real numbers: {value!r}")
    if isinstance(value, (int, float, complex)) and not isinstance(value, bool):
        return complex(value)
    if isinstance(value, str):
        text = value.strip().replace(' ', '').lower()
        if text in ('inf', 'infinity'):
            return complex('inf')
        text = text.replace('i', 'j')
        try:
            return complex(text)
        except ValueError:
            pass
    raise InputError(f"not a complex number: {value!r}")


def parse_sigma(text: str) -> Moebius:
    """Möbius map from "a,b,c,d" meaning (a z + b) / (c z + d)"""
    parts = [p for p in text.split(',') if p.strip()]
    if len(parts) != 4:
        raise InputError(f"sigma needs four complex numbers, got {text!r}")
    return Moebius(*(parse_complex(p) for p in parts))


def parse_relation(text: str) -> CriticalRelation:
    try:
        return CriticalRelation.parse(text)
    except ValueError as e:
        raise InputError(str(e))


@dataclass
class MapSpec:
    """A parsed map or symbolic orbit model with the text it came from"""

    source: str
    map: Optional[RatMap] = None
    symbolic: Optional[Dict] = None
    lattes: Optional[LattesMap] = None

    @property
    def is_symbolic(self) -> bool:
        return self.symbolic is not None

    def require_map(self) -> RatMap:
        if self.map is None:
            raise InputError(f"{self.source!r} is a symbolic orbit model, this command needs a map")
        return self.map

    def model(self, horizon: Optional[int] = None) -> OrbitModel:
        """Symbolic orbit model described by the spec"""
        data = dict(self.symbolic or {})
        if horizon is not None:
            data["horizon"] = horizon
        return OrbitModel.from_json(data)

    def to_json(self) -> dict:
        out: Dict[str, Any] = {'source': self.source}
        if self.map is not None:
            out['map'] = self.map.to_json()
        if self.symbolic is not None:
            out['model'] = self.symbolic
        if self.lattes is not None:
            out['lattes'] = self.lattes.to_json()
        return out


def _coefficients(values: List) -> Poly:
    if not isinstance(values, list) or not values:
        raise InputError("coefficient lists must be nonempty arrays")
    return Poly(tuple(parse_complex(v) for v in values))


def parse_spec_data(data: Dict, source: str) -> MapSpec:
    if not isinstance(data, dict):
        raise InputError("map spec must be a JSON object")
    if 'generators' in data:
        if 'nu' not in data:
            raise InputError("symbolic model needs 'nu'")
        return MapSpec(source, symbolic=data)
    if 'numerator' not in data:
        raise InputError("map spec needs 'numerator' (and optionally 'denominator')")
    num = _coefficients(data['numerator'])
    den = _coefficients(data.get('denominator', [[1, 0]]))
    return MapSpec(source, map=RatMap.reduced(num, den))


def load_spec(text: str) -> MapSpec:
    """
    Resolve a map spec argument

    Args:
        text: Fixture name, lattes:a=<complex>, inline JSON object or path to a JSON file

    Raises:
        InputError: unknown fixture, unreadable file or malformed JSON
    """
    text = text.strip()
    if text in POLYNOMIAL_FIXTURES:
        return MapSpec(text, map=RatMap.polynomial(POLYNOMIAL_FIXTURES[text]))
    if text == 'fig1':
        return MapSpec(text, symbolic=FIG1_MODEL)
    match = re.fullmatch(r'lattes:a=(.+)', text)
    if match:
        lattes = flexible_lattes(parse_complex(match.group(1)))
        return MapSpec(text, map=lattes.map, lattes=lattes)

    if text.startswith('{'):
        raw = text
    else:
        path = Path(text)
        if not path.exists():
            raise InputError(f"unknown fixture or missing file: {text}")
        try:
            raw = path.read_text(encoding='utf-8')
        except OSError as e:
            raise InputError(f"could not read {path}: {e}")
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as e:
        raise InputError(f"malformed JSON: {e}")
    return parse_spec_data(data, text)


def encode(value: Any) -> Any:
    """Convert results to JSON-safe values; infinity becomes "inf" """
    if hasattr(value, 'to_json'):
        return encode(value.to_json())
    if isinstance(value, dict):
        return {str(k): encode(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [encode(v) for v in value]
    if isinstance(value, np.ndarray):
        return encode(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        if is_infinite(value):
            return 'inf'
        return [float(value.real), float(value.imag)]
    if isinstance(value, (float, np.floating)):
        return 'inf' if np.isinf(value) else float(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def build_report(command: str, spec: MapSpec, results: Dict, wall_time: Optional[float] = None) -> Dict:
    """Schema-tagged report with the input echo and the tolerances in force"""
    report = {
        'schema': SCHEMA,
        'command': command,
        'input': spec.to_json(),
        'results': results,
        'tolerances': Settings.as_dict(),
    }
    if wall_time is not None:
        report['wall_time'] = wall_time
    return encode(report)


def dumps(report: Dict) -> str:
    return json.dumps(report, indent=2, ensure_ascii=False)
