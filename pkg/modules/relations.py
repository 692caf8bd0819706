"""
Relations Module
Critical relations, orbit models, shift-saturated closures and proper collections
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from .algebra import chordal_distance
from .config import Settings
from .errors import (
    AmbiguousCollision,
    HorizonExhausted,
    InputError,
    PreconditionError,
)
from .ratmap import CriticalSet, RatMap, critical_set, orbit

logger = logging.getLogger(__name__)

Node = Tuple[int, int]


class TriState(Enum):
    TRUE = 'true'
    FALSE = 'false'
    UNKNOWN = 'unknown'

    @classmethod
    def of(cls, value: bool) -> TriState:
        return cls.TRUE if value else cls.FALSE

    def __bool__(self) -> bool:
        return self is TriState.TRUE


def all_of(*states: TriState) -> TriState:
    """FALSE beats UNKNOWN beats TRUE"""
    if any(s is TriState.FALSE for s in states):
        return TriState.FALSE
    if any(s is TriState.UNKNOWN for s in states):
        return TriState.UNKNOWN
    return TriState.TRUE


@dataclass(frozen=True, order=True)
class CriticalRelation:
    """The assertion f^m(c_i) = f^n(c_j)"""

    i: int
    j: int
    m: int
    n: int

    def __post_init__(self):
        for name in ('i', 'j', 'm', 'n'):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value:
                raise InputError(f"relation field {name} must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        if self.i < 1 or self.j < 1:
            raise InputError(f"critical indices start at 1: {self}")
        if self.m < 0 or self.n < 0 or self.m + self.n == 0:
            raise InputError(f"need m, n >= 0 and m + n > 0: {self}")

    @classmethod
    def parse(cls, text: str) -> CriticalRelation:
        """Parse 'i,j,m,n' (also accepts 'i,j;m,n')"""
        parts = text.replace(';', ',').replace('(', '').replace(')', '').split(',')
        if len(parts) != 4:
            raise InputError(f"relation needs four integers i,j,m,n: {text!r}")
        try:
            return cls(*(int(p) for p in parts))
        except ValueError:
            raise InputError(f"relation needs four integers i,j,m,n: {text!r}")

    @property
    def left(self) -> Node:
        return (self.i, self.m)

    @property
    def right(self) -> Node:
        return (self.j, self.n)

    def shifted(self, k: int) -> CriticalRelation:
        return CriticalRelation(self.i, self.j, self.m + k, self.n + k)

    def to_json(self) -> List[int]:
        return [self.i, self.j, self.m, self.n]

    def __str__(self):
        return f"({self.i},{self.j};{self.m},{self.n})"


class EquivClosure:
    """Shift-saturated union-find over {(i, m): 1 <= i <= nu, 0 <= m <= H}"""

    def __init__(self, nu: int, horizon: int):
        self.nu = nu
        self.horizon = horizon
        self.parent: Dict[Node, Node] = {}
        self.rank = Counter()
        # Member with the smallest orbit index in each class
        self.witness: Dict[Node, Node] = {}

    def _check(self, node: Node):
        i, m = node
        if not 1 <= i <= self.nu:
            raise PreconditionError(f"critical index {i} outside 1..{self.nu}")
        if m < 0:
            raise PreconditionError(f"negative orbit index {m}")
        if m > self.horizon:
            raise HorizonExhausted(f"orbit index {m} beyond horizon {self.horizon}", [i])

    def find(self, node: Node) -> Node:
        if node not in self.parent:
            self._check(node)
            self.parent[node] = node
            self.witness[node] = node
            return node
        root = node
        while self.parent[root] != root:
            root = self.parent[root]
        # Path compression
        while self.parent[node] != root:
            self.parent[node], node = root, self.parent[node]
        return root

    def union(self, a: Node, b: Node) -> bool:
        """Merge two nodes and every pair of successors; True if anything changed"""
        merged = False
        queue = [(a, b)]
        while queue:
            x, y = queue.pop()
            rx, ry = self.find(x), self.find(y)
            if rx == ry:
                continue
            wx, wy = self.witness[rx], self.witness[ry]
            if self.rank[rx] < self.rank[ry]:
                rx, ry = ry, rx
            self.parent[ry] = rx
            if self.rank[rx] == self.rank[ry]:
                self.rank[rx] += 1
            self.witness[rx] = min(wx, wy, key=lambda node: node[1])
            merged = True
            if wx[1] < self.horizon and wy[1] < self.horizon:
                queue.append(((wx[0], wx[1] + 1), (wy[0], wy[1] + 1)))
        return merged

    def add(self, rel: CriticalRelation) -> bool:
        return self.union(rel.left, rel.right)

    def equiv(self, a: Node, b: Node) -> bool:
        return self.find(a) == self.find(b)

    def nodes(self) -> Iterable[Node]:
        for i in range(1, self.nu + 1):
            for m in range(self.horizon + 1):
                yield (i, m)

    def classes(self) -> Dict[Node, List[Node]]:
        groups: Dict[Node, List[Node]] = {}
        for node in self.nodes():
            groups.setdefault(self.find(node), []).append(node)
        return groups

    def check_consistent(self):
        """Two distinct critical points can never be identified"""
        seen: Dict[Node, int] = {}
        for i in range(1, self.nu + 1):
            root = self.find((i, 0))
            if root in seen:
                raise PreconditionError(f"relations identify c_{seen[root]} with c_{i}")
            seen[root] = i


def closure(F: Iterable[CriticalRelation], nu: int, H: int) -> EquivClosure:
    """Smallest shift-invariant equivalence containing F, truncated at H"""
    cl = EquivClosure(nu, H)
    for rel in F:
        if max(rel.i, rel.j) > nu:
            raise PreconditionError(f"{rel} refers to a critical point beyond nu = {nu}")
        if max(rel.m, rel.n) > H:
            raise PreconditionError(f"{rel} exceeds the horizon {H}")
        cl.add(rel)
    return cl


class OrbitModel:
    """Orbit data of the critical points: symbolic generators or numeric orbits"""

    def __init__(self, kind: str, nu: int, horizon: int, equivalences: EquivClosure,
                 statuses: List[str], depth: int):
        self.kind = kind
        self.nu = nu
        self.horizon = horizon
        self.closure = equivalences
        self.statuses = statuses
        self.depth = depth
        self.generators: Tuple[CriticalRelation, ...] = ()
        self.map: Optional[RatMap] = None
        self.critical: Optional[CriticalSet] = None
        self.orbits: Optional[np.ndarray] = None
        self.tol: Optional[float] = None

    @classmethod
    def symbolic(cls, nu: int, generators: Sequence[CriticalRelation],
                 landings: Sequence[Tuple[int, int, int]] = (), horizon: Optional[int] = None) -> OrbitModel:
        """
        Model an orbit diagram from its generating coincidences

        Args:
            nu: Number of critical points
            generators: Relations f^m(c_i) = f^n(c_j)
            landings: Triples (i, m, j) meaning f^m(c_i) = c_j
            horizon: Orbit length (Settings.SYMBOLIC_HORIZON)
        """
        horizon = Settings.SYMBOLIC_HORIZON if horizon is None else horizon
        rels = list(generators) + [CriticalRelation(i, j, m, 0) for i, m, j in landings]
        cl = closure(rels, nu, horizon)
        cl.check_consistent()
        depth = max((max(r.m, r.n) for r in rels), default=0)

        periodic = _periodic_rays(cl)
        statuses = []
        for i in range(1, nu + 1):
            if i in periodic:
                statuses.append('finite')
            elif horizon >= 2 * depth + 2:
                statuses.append('infinite')
            else:
                statuses.append('unknown')

        model = cls('symbolic', nu, horizon, cl, statuses, depth)
        model.generators = tuple(rels)
        return model

    @classmethod
    def numeric(cls, f: RatMap, tol: Optional[float] = None, horizon: Optional[int] = None,
                polynomial: Optional[bool] = None, crit: Optional[CriticalSet] = None,
                separation: Optional[float] = None, confirm_steps: Optional[int] = None) -> OrbitModel:
        """
        Scan the critical orbits of f for coincidences

        A coincidence (i, t) ~ (j, n) is accepted when the points agree within
        tol in the chordal metric, the preceding points were separated
        (otherwise the orbits are converging and the ray is marked attracted),
        and the next confirm_steps shifted pairs agree as well.

        Args:
            f: Rational map
            tol: Coincidence tolerance (Settings.COLLISION_TOL)
            horizon: Orbit length (Settings.NUMERIC_HORIZON)
            polynomial: Use the finite critical points only; defaults to f.is_polynomial
            crit: Critical set of f, computed when omitted
        """
        tol = Settings.COLLISION_TOL if tol is None else tol
        horizon = Settings.NUMERIC_HORIZON if horizon is None else horizon
        separation = Settings.SEPARATION if separation is None else separation
        confirm_steps = Settings.CONFIRM_STEPS if confirm_steps is None else confirm_steps
        polynomial = f.is_polynomial if polynomial is None else polynomial
        if polynomial and not f.is_polynomial:
            raise PreconditionError("polynomial orbit model needs a polynomial map")

        crit = critical_set(f) if crit is None else crit
        if polynomial:
            crit = crit.finite()
        nu = crit.nu
        pts = np.array([orbit(f, c, horizon) for c in crit.locations], dtype=complex).reshape(nu, horizon + 1)

        truncate = [horizon] * nu
        escaped: Set[int] = set()
        attracted: Set[int] = set()
        if polynomial:
            coeffs = np.abs(f.num.array / f.den.coeffs[0])
            escape_radius = 2.0 * max(1.0, (1.0 + coeffs[:-1].sum()) / coeffs[-1])
            for i in range(nu):
                outside = np.nonzero(~(np.abs(pts[i]) <= escape_radius))[0]
                if outside.size:
                    truncate[i] = int(outside[0])
                    escaped.add(i)

        cl = EquivClosure(nu, horizon)
        depth = 0
        index = np.arange(horizon + 1)
        confirm_tol = 1e3 * tol

        for t in range(1, horizon + 1):
            for i in range(nu):
                if t > truncate[i]:
                    continue
                limits = np.array([min(truncate[j], t if j < i else t - 1) for j in range(nu)])
                mask = index[None, :] <= limits[:, None]
                dist = np.where(mask, chordal_distance(pts[i, t], pts), np.inf)
                close = np.argwhere(dist < tol)
                if close.size == 0:
                    continue

                eligible: List[Node] = []
                for j, n in sorted(close.tolist(), key=lambda jn: dist[jn[0], jn[1]]):
                    if cl.equiv((i + 1, t), (j + 1, n)):
                        continue
                    if n == 0:
                        clean = (i == j and t == 1) or chordal_distance(pts[i, t - 1], pts[j, 0]) >= separation
                    else:
                        clean = chordal_distance(pts[i, t - 1], pts[j, n - 1]) >= separation
                    if not clean:
                        logger.debug(f"ray {i + 1} converges onto ({j + 1},{n}) at step {t}")
                        attracted.add(i)
                        truncate[i] = t
                        eligible = []
                        break
                    confirmed = all(
                        chordal_distance(pts[i, t + s], pts[j, n + s]) < confirm_tol
                        for s in range(1, confirm_steps + 1)
                        if t + s <= truncate[i] and n + s <= horizon
                    )
                    if confirmed:
                        eligible.append((j + 1, n))
                    else:
                        logger.debug(f"near miss ({i + 1},{t}) ~ ({j + 1},{n}) rejected")

                if not eligible:
                    continue
                best = eligible[0]
                for other in eligible[1:]:
                    if not cl.equiv(best, other) and chordal_distance(
                            pts[best[0] - 1, best[1]], pts[other[0] - 1, other[1]]) >= tol:
                        raise AmbiguousCollision(
                            f"({i + 1},{t}) matches both {best} and {other}", [best, other])
                cl.union((i + 1, t), best)
                depth = max(depth, t)
                truncate[i] = t

        cl.check_consistent()
        periodic = _periodic_rays(cl)
        infinite = {i + 1 for i in escaped | attracted}
        statuses = []
        for i in range(1, nu + 1):
            if i in periodic:
                statuses.append('finite')
            elif i in infinite or _merged_rays(cl, i) & infinite:
                statuses.append('infinite')
            else:
                statuses.append('unknown')

        model = cls('numeric', nu, horizon, cl, statuses, depth)
        model.map = f
        model.critical = crit
        model.orbits = pts
        model.tol = tol
        logger.debug(f"numeric model: nu={nu}, statuses={statuses}")
        return model

    @classmethod
    def from_json(cls, data: dict) -> OrbitModel:
        """{"nu": int, "generators": [[i,j,m,n],...], "landings": [[i,m,j],...]}"""
        try:
            nu = int(data['nu'])
            generators = [CriticalRelation(*g) for g in data.get('generators', [])]
            landings = [tuple(int(v) for v in l) for l in data.get('landings', [])]
            horizon = data.get('horizon')
            horizon = None if horizon is None else int(horizon)
        except (KeyError, TypeError, ValueError) as e:
            raise InputError(f"invalid symbolic model: {e}")
        if any(len(l) != 3 for l in landings):
            raise InputError("landings are triples [i, m, j]")
        return cls.symbolic(nu, generators, landings, horizon)

    def realized(self, rel: CriticalRelation) -> bool:
        """Whether the model identifies f^m(c_i) with f^n(c_j)"""
        if max(rel.i, rel.j) > self.nu:
            return False
        return self.closure.equiv(rel.left, rel.right)

    def ray_status(self, i: int) -> str:
        return self.statuses[i - 1]

    def to_json(self) -> dict:
        data = {
            'kind': self.kind,
            'nu': self.nu,
            'horizon': self.horizon,
            'ray_status': list(self.statuses),
        }
        if self.kind == 'symbolic':
            data['generators'] = [g.to_json() for g in self.generators]
        return data


def _periodic_rays(cl: EquivClosure) -> Set[int]:
    periodic = set()
    for members in cl.classes().values():
        counts = Counter(i for i, _ in members)
        periodic.update(i for i, c in counts.items() if c > 1)
    return periodic


def _merged_rays(cl: EquivClosure, i: int) -> Set[int]:
    """Rays sharing at least one class with ray i"""
    roots = {cl.find((i, m)) for m in range(cl.horizon + 1)}
    return {j for j, m in cl.nodes() if j != i and cl.find((j, m)) in roots}


def _orient(a: Node, b: Node) -> CriticalRelation:
    (i, m), (j, n) = a, b
    if n == 0 or (m != 0 and (i > j or (i == j and m > n))):
        return CriticalRelation(i, j, m, n)
    return CriticalRelation(j, i, n, m)


def detect_relations(model: OrbitModel) -> List[CriticalRelation]:
    """
    First collisions between every pair of critical rays, plus first landings

    Returns:
        Sorted relations; for a symbolic model the generators are included verbatim
    """
    best: Dict[Tuple[int, int], Tuple[Tuple[int, int], Node, Node]] = {}
    landings: Dict[Tuple[int, int], int] = {}

    for members in model.closure.classes().values():
        first: Dict[int, List[int]] = {}
        for i, m in sorted(members, key=lambda node: node[1]):
            first.setdefault(i, [])
            if len(first[i]) < 2:
                first[i].append(m)

        rays = sorted(first)
        for a_idx, a in enumerate(rays):
            if len(first[a]) == 2:
                key = (first[a][0] + first[a][1], first[a][1])
                candidate = (key, (a, first[a][1]), (a, first[a][0]))
                if (a, a) not in best or key < best[(a, a)][0]:
                    best[(a, a)] = candidate
            for b in rays[a_idx + 1:]:
                ma, mb = first[a][0], first[b][0]
                key = (ma + mb, max(ma, mb))
                if (a, b) not in best or key < best[(a, b)][0]:
                    best[(a, b)] = (key, (a, ma), (b, mb))

            # Landing of ray b on c_a when (a, 0) is in this class
            if first[a][0] == 0:
                for b in rays:
                    if b != a:
                        m = first[b][0]
                        if (b, a) not in landings or m < landings[(b, a)]:
                            landings[(b, a)] = m

    found: Set[CriticalRelation] = {_orient(x, y) for _, x, y in best.values()}
    for (i, j), m in landings.items():
        if m > 0:
            found.add(CriticalRelation(i, j, m, 0))
    found.update(model.generators)
    return sorted(found)


@dataclass
class RelationCollection:
    """Ordered critical relations with fullness and properness flags"""

    relations: Tuple[CriticalRelation, ...]
    full: TriState = TriState.UNKNOWN
    minimally_full: TriState = TriState.UNKNOWN
    proper: TriState = TriState.UNKNOWN
    noncyclic: TriState = TriState.UNKNOWN
    zeta: Optional[int] = None
    horizon_limited: Tuple[int, ...] = field(default_factory=tuple)

    def __len__(self):
        return len(self.relations)

    def __iter__(self):
        return iter(self.relations)

    def to_json(self) -> dict:
        return {
            'relations': [r.to_json() for r in self.relations],
            'full': self.full.value,
            'minimally_full': self.minimally_full.value,
            'proper': self.proper.value,
            'noncyclic': self.noncyclic.value,
            'zeta': self.zeta,
            'horizon_limited': list(self.horizon_limited),
        }


def _critical_roots(cl: EquivClosure) -> Set[Node]:
    return {cl.find((l, 0)) for l in range(1, cl.nu + 1)}


def is_full(F: Sequence[CriticalRelation], model: OrbitModel) -> TriState:
    """
    Every relation realized within the checking window is reached from F by
    shifting along non-critical points
    """
    H = model.horizon
    for rel in F:
        if max(rel.m, rel.n) > H:
            return TriState.UNKNOWN
        if not model.realized(rel):
            return TriState.FALSE

    fc = closure(F, model.nu, H)
    depth = max([model.depth] + [max(r.m, r.n) for r in F])
    window = H - depth
    if window < 1:
        return TriState.UNKNOWN

    mc = model.closure
    critical = _critical_roots(mc)

    def covered(a: Node, b: Node) -> bool:
        while True:
            if fc.equiv(a, b):
                return True
            if mc.find(a) in critical or a[1] >= H or b[1] >= H:
                return False
            a, b = (a[0], a[1] + 1), (b[0], b[1] + 1)

    for members in mc.classes().values():
        inside = [node for node in members if node[1] <= window]
        for idx, a in enumerate(inside):
            for b in inside[idx + 1:]:
                if not covered(a, b):
                    logger.debug(f"realized pair {a} ~ {b} not covered")
                    return TriState.FALSE
    return TriState.TRUE


def is_minimally_full(F: Sequence[CriticalRelation], model: OrbitModel) -> TriState:
    full = is_full(F, model)
    collection = build_proper(model)
    if collection.horizon_limited:
        return all_of(full, TriState.UNKNOWN)
    return all_of(full, TriState.of(len(F) == model.nu - collection.zeta))


def is_noncyclic(F: Sequence[CriticalRelation]) -> bool:
    """No cycle i1 -> i2 -> ... -> i1 among relations (i, j; 1, 1)"""
    graph: Dict[int, Set[int]] = {}
    for rel in F:
        if rel.m == 1 and rel.n == 1 and rel.i != rel.j:
            graph.setdefault(rel.i, set()).add(rel.j)

    WHITE, GREY, BLACK = 0, 1, 2
    color: Dict[int, int] = {}

    def visit(u: int) -> bool:
        color[u] = GREY
        for v in graph.get(u, ()):
            state = color.get(v, WHITE)
            if state == GREY:
                return True
            if state == WHITE and visit(v):
                return True
        color[u] = BLACK
        return False

    return not any(color.get(u, WHITE) == WHITE and visit(u) for u in list(graph))


def _proper_conditions(F: Sequence[CriticalRelation], model: OrbitModel) -> TriState:
    mc = model.closure
    H = model.horizon
    critical = _critical_roots(mc)

    for rel in F:
        # (1)
        if rel.m == 0 or not (rel.i >= rel.j or rel.n == 0):
            return TriState.FALSE
        if rel.i == rel.j and rel.m <= rel.n:
            return TriState.FALSE

    for rel in F:
        # (2)
        if rel.m - 1 > H:
            return TriState.UNKNOWN
        earlier = {mc.find((l, t)) for l in range(1, rel.i) for t in range(H + 1)}
        seen: Set[Node] = set()
        for k in range(1, rel.m):
            root = mc.find((rel.i, k))
            if root in seen or root in critical or root in earlier:
                return TriState.FALSE
            seen.add(root)

    # (3), (4), (5)
    sources = Counter(rel.i for rel in F)
    targets = Counter(rel.j for rel in F if rel.n == 0)
    unit = Counter((rel.j, rel.n) for rel in F if rel.m == 1 and rel.n > 1)
    if any(c > 1 for c in sources.values()) or any(c > 1 for c in targets.values()) \
            or any(c > 1 for c in unit.values()):
        return TriState.FALSE

    # (6)
    for rel in F:
        if rel.m > 1 and rel.n > 0:
            for other in F:
                if other.j == rel.i and other.m == 1 and other.n >= rel.m:
                    return TriState.FALSE
    return TriState.TRUE


def is_proper(F: Sequence[CriticalRelation], model: OrbitModel) -> TriState:
    return all_of(is_minimally_full(F, model), _proper_conditions(F, model))


def build_proper(model: OrbitModel, strict: bool = False) -> RelationCollection:
    """
    Proper collection by the inductive first-return construction

    For each ray i the first index m_i whose point repeats an own earlier
    point, a critical point, or an earlier ray's point before its own
    relation is found; a collision with an orbit point is preferred to a
    landing on a critical point, and among orbit points the smallest j with
    n = 1, else the smallest j.

    Args:
        model: Orbit model
        strict: Raise HorizonExhausted instead of treating undecided rays as free
    """
    mc = model.closure
    H = model.horizon
    critical = _critical_roots(mc)
    forbidden: Set[Node] = set()
    lengths: Dict[int, int] = {}
    relations: List[CriticalRelation] = []
    free: List[int] = []
    limited: List[int] = []

    for i in range(1, model.nu + 1):
        own: Set[Node] = set()
        chosen: Optional[CriticalRelation] = None
        for k in range(1, H + 1):
            root = mc.find((i, k))
            if root in forbidden or root in critical or root in own:
                candidates = []
                for j in range(1, i + 1):
                    limit = lengths.get(j, H) if j < i else k - 1
                    for n in range(1, limit + 1):
                        if mc.find((j, n)) == root:
                            candidates.append((j, n))
                            break
                if candidates:
                    ones = [c for c in candidates if c[1] == 1]
                    j, n = min(ones or candidates)
                    chosen = CriticalRelation(i, j, k, n)
                else:
                    j = next(l for l in range(1, model.nu + 1) if mc.find((l, 0)) == root)
                    chosen = CriticalRelation(i, j, k, 0)
                lengths[i] = k
                break
            own.add(root)

        if chosen is None:
            if model.ray_status(i) != 'infinite':
                limited.append(i)
                logger.warning(f"ray {i} has no collision within horizon {H}; treated as free")
                if strict:
                    raise HorizonExhausted(f"m_{i} undetermined within horizon {H}", [i])
            free.append(i)
            forbidden.update(mc.find((i, t)) for t in range(H + 1))
        else:
            relations.append(chosen)
            forbidden.update(mc.find((i, t)) for t in range(lengths[i]))

    settled = TriState.UNKNOWN if limited else TriState.TRUE
    return RelationCollection(
        relations=tuple(relations),
        full=settled,
        minimally_full=settled,
        proper=settled,
        noncyclic=TriState.of(is_noncyclic(relations)),
        zeta=len(free),
        horizon_limited=tuple(limited),
    )


def zeta(model: OrbitModel, strict: bool = False) -> int:
    """Number of free critical rays"""
    return model.nu - len(build_proper(model, strict).relations)


def assess(F: Sequence[CriticalRelation], model: OrbitModel) -> RelationCollection:
    """Evaluate every predicate on a given collection"""
    collection = build_proper(model)
    return RelationCollection(
        relations=tuple(F),
        full=is_full(F, model),
        minimally_full=is_minimally_full(F, model),
        proper=is_proper(F, model),
        noncyclic=TriState.of(is_noncyclic(F)),
        zeta=collection.zeta,
        horizon_limited=collection.horizon_limited,
    )
