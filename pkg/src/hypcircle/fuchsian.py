"""
Concrete cocompact lattices in SL(2,R).

Triangle groups are built from the reflections in the sides of a hyperbolic
triangle; the same reflections reduce points into the fundamental domain
D = T u s(T), where s is the reflection in the side through the two vertices
P = i and Q. Orbit balls are enumerated breadth-first with a rounded-cell
deduplication index in disc coordinates.
"""

import logging
import math
import os
from dataclasses import dataclass, field
from functools import partial
from typing import List, Optional, Sequence, Set, Tuple, Union

import numpy as np

from .errors import EnumerationCapError, GeometryError, GroupError, SamplingError
from .hyperbolic import I_POINT, HPoint, hyp_dist, hyp_dist_many, mobius, mobius_many, to_disc
from .parallel import chunk_sizes, chunked, parallel_map, spawn_seeds
from .sl2 import SL2Matrix, as_stack, iwasawa_many, renormalize_many, rotation

logger = logging.getLogger(__name__)

RELATION_TOLERANCE = 1e-10
DEDUP_TOLERANCE = 1e-9
INSIDE_TOLERANCE = 1e-12
COUNT_SLACK = 1e-12
MAX_REDUCTION_STEPS = 10_000
DEFAULT_POINT_CAP = 12_000_000
DEFAULT_WORD_CAP = 2_000_000
MIN_ACCEPTANCE = 1e-4
FRONTIER_CHUNK = 50_000

Word = Tuple[int, ...]
Relation = Tuple[Word, int]


@dataclass(frozen=True)
class Geodesic:
    """A complete geodesic: the vertical line x = center if radius is None, else a semicircle."""
    center: float
    radius: Optional[float] = None

    @classmethod
    def through(cls, z1: complex, z2: complex) -> "Geodesic":
        if abs(z1.real - z2.real) <= 1e-14 * max(1.0, abs(z1), abs(z2)):
            return cls(center=0.5 * (z1.real + z2.real))
        c0 = (abs(z2) ** 2 - abs(z1) ** 2) / (2.0 * (z2.real - z1.real))
        return cls(center=c0, radius=abs(z1 - c0))

    @property
    def reflection(self) -> np.ndarray:
        """Matrix M (det -1, M^2 = I) with the reflection acting as z -> M . conj(z)."""
        if self.radius is None:
            return np.array([[-1.0, 2.0 * self.center], [0.0, 1.0]])
        c0, r = self.center, self.radius
        return np.array([[c0, r * r - c0 * c0], [1.0, -c0]]) / r

    def side(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        if self.radius is None:
            return z.real - self.center
        return (np.abs(z - self.center) ** 2 - self.radius ** 2) / self.radius

    def reflect(self, z) -> np.ndarray:
        m = self.reflection
        w = np.conj(np.asarray(z, dtype=complex))
        return (m[0, 0] * w + m[0, 1]) / (m[1, 0] * w + m[1, 1])

    def segment(self, z1: complex, z2: complex, n: int = 256) -> np.ndarray:
        """Points along the arc of this geodesic between z1 and z2."""
        tau = np.linspace(0.0, 1.0, n)
        if self.radius is None:
            return self.center + 1j * np.exp((1 - tau) * math.log(z1.imag) + tau * math.log(z2.imag))
        a1 = np.angle(z1 - self.center)
        a2 = np.angle(z2 - self.center)
        return self.center + self.radius * np.exp(1j * ((1 - tau) * a1 + tau * a2))


@dataclass(frozen=True)
class TriangleDomain:
    """Geodesic triangle P, Q, R and the doubled fundamental domain T u s_PQ(T)."""
    vertices: Tuple[complex, complex, complex]
    sides: Tuple[Geodesic, Geodesic, Geodesic]
    orientation: Tuple[float, float, float]

    @classmethod
    def from_vertices(cls, P: complex, Q: complex, R: complex) -> "TriangleDomain":
        sides = (Geodesic.through(P, Q), Geodesic.through(Q, R), Geodesic.through(R, P))
        # Each side's inner half-plane is the one containing the opposite vertex.
        opposite = (R, P, Q)
        orientation = tuple(float(np.sign(s.side(v))) for s, v in zip(sides, opposite))
        return cls(vertices=(P, Q, R), sides=sides, orientation=orientation)

    @property
    def mirror(self) -> Geodesic:
        return self.sides[0]

    def in_triangle(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        ok = np.ones(z.shape, dtype=bool)
        for s, o in zip(self.sides, self.orientation):
            ok &= s.side(z) * o >= -INSIDE_TOLERANCE
        return ok

    def contains(self, z) -> np.ndarray:
        return self.in_triangle(z) | self.in_triangle(self.mirror.reflect(z))

    def corners(self) -> List[complex]:
        P, Q, R = self.vertices
        return [P, Q, R, complex(self.mirror.reflect(R))]

    def boundary_samples(self, n: int = 256) -> np.ndarray:
        P, Q, R = self.vertices
        arcs = [s.segment(a, b, n) for s, (a, b) in zip(self.sides, [(P, Q), (Q, R), (R, P)])]
        pts = np.concatenate(arcs)
        return np.concatenate([pts, self.mirror.reflect(pts)])

    def bounding_box(self) -> Tuple[float, float, float, float]:
        pts = self.boundary_samples()
        return float(pts.real.min()), float(pts.real.max()), float(pts.imag.min()), float(pts.imag.max())

    def diameter(self) -> float:
        c = self.corners()
        return max(hyp_dist(a, b) for a in c for b in c)

    def covering_radius(self, z: complex) -> float:
        """Largest distance from z to a corner of D, i.e. the covering radius about z."""
        return max(hyp_dist(z, c) for c in self.corners())


@dataclass
class FuchsianGroup:
    """
    A cocompact lattice given by generator matrices.

    Relations are (word, order) pairs meaning word^order = +-I; a word is a
    tuple of 1-based generator indices, negative for inverses.
    """
    generators: List[SL2Matrix]
    relations: List[Relation]
    covol_surface: float
    stabilizer_order: int
    name: str = "custom"
    domain: Optional[TriangleDomain] = None
    base: HPoint = I_POINT

    def __post_init__(self):
        if not self.covol_surface > 0:
            raise GroupError(f"covol_surface must be positive, got {self.covol_surface!r}")
        if self.stabilizer_order < 1:
            raise GroupError(f"stabilizer_order must be >= 1, got {self.stabilizer_order!r}")
        for (word, order), err in zip(self.relations, self.relation_residuals()):
            if err > RELATION_TOLERANCE:
                raise GroupError(f"Relation {word}^{order} is off +-I by {err:.3e}")

    def word(self, word: Sequence[int]) -> SL2Matrix:
        out = SL2Matrix.identity()
        for letter in word:
            if letter == 0 or abs(letter) > len(self.generators):
                raise GroupError(f"Invalid generator index {letter} in word {tuple(word)}")
            g = self.generators[abs(letter) - 1]
            out = out @ (g if letter > 0 else g.inverse())
        return out

    def relation_residuals(self) -> List[float]:
        errs = []
        for word, order in self.relations:
            w = self.word(word)
            m = SL2Matrix.identity()
            for _ in range(order):
                m = m @ w
            errs.append(min(np.max(np.abs(m.array - np.eye(2))), np.max(np.abs(m.array + np.eye(2)))))
        return errs

    def generator_stack(self, with_inverses: bool = True) -> np.ndarray:
        gens = [g.array for g in self.generators]
        if with_inverses:
            gens += [g.inverse().array for g in self.generators]
        return np.stack(gens)

    def generator_order(self, index: int) -> Optional[int]:
        for word, order in self.relations:
            if tuple(word) == (index,):
                return order
        return None

    def stabilizer(self, base: HPoint = I_POINT) -> np.ndarray:
        """Stack of elements fixing `base`: powers of the elliptic generators centred there."""
        elems = [np.eye(2)]
        for idx, g in enumerate(self.generators, start=1):
            order = self.generator_order(idx)
            if order is None or hyp_dist(mobius(g, base), base) > 1e-9:
                continue
            power = SL2Matrix.identity()
            for _ in range(order - 1):
                power = power @ g
                if not any(np.allclose(power.array, e, atol=1e-9) or np.allclose(power.array, -e, atol=1e-9)
                           for e in elems):
                    elems.append(power.array)
        return np.stack(elems)

    def displacements(self, base: HPoint = I_POINT) -> np.ndarray:
        return hyp_dist_many(mobius_many(self.generator_stack(), base.z), base.z)

    def min_displacement(self, base: HPoint = I_POINT) -> float:
        d = self.displacements(base)
        moving = d[d > 1e-9]
        return float(moving.min()) if moving.size else 0.0

    def domain_diameter(self) -> float:
        if self.domain is None:
            raise GroupError(f"Group '{self.name}' has no fundamental domain")
        return self.domain.diameter()

    def require_domain(self) -> TriangleDomain:
        if self.domain is None:
            raise GroupError(f"Group '{self.name}' has no fundamental domain; reduction and sampling "
                             "are only automated for triangle groups")
        return self.domain


def triangle_group(p: int, q: int, r: int) -> FuchsianGroup:
    """
    The orientation-preserving (p, q, r) triangle group.

    The triangle has angles pi/p at P = i, pi/q at Q on the imaginary axis
    above i, and pi/r at R; generators are the products of reflections in
    the sides meeting at each vertex, so g_P g_Q g_R = I exactly.
    """
    if min(p, q, r) < 2:
        raise GeometryError(f"Triangle signature entries must be >= 2, got ({p},{q},{r})")
    if 1.0 / p + 1.0 / q + 1.0 / r >= 1.0:
        raise GeometryError(f"Signature ({p},{q},{r}) is Euclidean or spherical, not hyperbolic")
    alpha, beta, gamma = math.pi / p, math.pi / q, math.pi / r
    side_pq = math.acosh((math.cos(alpha) * math.cos(beta) + math.cos(gamma)) / (math.sin(alpha) * math.sin(beta)))
    side_pr = math.acosh((math.cos(alpha) * math.cos(gamma) + math.cos(beta)) / (math.sin(alpha) * math.sin(gamma)))
    P = 1j
    Q = 1j * math.exp(side_pq)
    R = mobius(rotation(alpha / 2.0), 1j * math.exp(side_pr)).z
    domain = TriangleDomain.from_vertices(P, Q, R)
    m_pq, m_qr, m_rp = (s.reflection for s in domain.sides)
    generators = [SL2Matrix.from_array(m) for m in (m_rp @ m_pq, m_pq @ m_qr, m_qr @ m_rp)]
    relations = [((1,), p), ((2,), q), ((3,), r), ((1, 2, 3), 1)]
    covol = 2.0 * (math.pi - alpha - beta - gamma)
    logger.debug("triangle (%d,%d,%d): |PQ|=%.6f |PR|=%.6f covol=%.6f", p, q, r, side_pq, side_pr, covol)
    return FuchsianGroup(generators=generators, relations=relations, covol_surface=covol,
                         stabilizer_order=p, name=f"triangle:{p},{q},{r}", domain=domain)


# --- Reduction into the fundamental domain ---

def reduce_points(G: FuchsianGroup, zs) -> Tuple[np.ndarray, np.ndarray]:
    """
    Reduce points into D by reflecting across violated sides.

    Returns the reduced points and the stack of elements gamma in G with
    gamma . z = reduced z.
    """
    domain = G.require_domain()
    z = np.array(zs, dtype=complex, ndmin=1)
    mats = np.broadcast_to(np.eye(2), z.shape + (2, 2)).copy()
    parity = np.zeros(z.shape, dtype=bool)
    for _ in range(MAX_REDUCTION_STEPS):
        moved = False
        for side, orient in zip(domain.sides, domain.orientation):
            bad = side.side(z) * orient < -INSIDE_TOLERANCE
            if bad.any():
                moved = True
                z[bad] = side.reflect(z[bad])
                mats[bad] = np.einsum("ij,njk->nik", side.reflection, mats[bad])
                parity[bad] = ~parity[bad]
        if not moved:
            break
    else:
        raise GroupError(f"Domain reduction did not terminate within {MAX_REDUCTION_STEPS} steps")
    if parity.any():
        mirror = domain.mirror
        z[parity] = mirror.reflect(z[parity])
        mats[parity] = np.einsum("ij,njk->nik", mirror.reflection, mats[parity])
    det = mats[:, 0, 0] * mats[:, 1, 1] - mats[:, 0, 1] * mats[:, 1, 0]
    return z, mats / np.sqrt(np.abs(det))[:, None, None]


def reduce_elements(G: FuchsianGroup, gs) -> Tuple[np.ndarray, np.ndarray]:
    """Left-multiply group elements so that g . i lies in D; returns (gamma g, gamma)."""
    gs = as_stack(gs)
    _, gammas = reduce_points(G, mobius_many(gs, 1j))
    return renormalize_many(gammas @ gs), gammas


def reduce_to_domain(G: FuchsianGroup, x: Union[HPoint, complex, SL2Matrix]):
    """Scalar form: returns (reduced object, gamma) for a point or a group element."""
    if isinstance(x, SL2Matrix):
        g, gamma = reduce_elements(G, x)
        return SL2Matrix.from_array(g[0]), SL2Matrix.from_array(gamma[0])
    z = x.z if isinstance(x, HPoint) else complex(x)
    zr, gamma = reduce_points(G, [z])
    return HPoint.from_complex(complex(zr[0])), SL2Matrix.from_array(gamma[0])


def in_domain(G: FuchsianGroup, z) -> np.ndarray:
    return G.require_domain().contains(z)


# --- Orbit enumeration ---

@dataclass
class OrbitBall:
    """Orbit points of `base` within `radius`, one representative element per point."""
    radius: float
    base: HPoint
    points: np.ndarray
    elements: np.ndarray
    distances: np.ndarray
    dedup_tol: float = DEDUP_TOLERANCE
    complete: bool = True

    def __len__(self) -> int:
        return int(self.points.size)

    def count(self, R: float) -> int:
        return int(np.count_nonzero(self.distances <= R + COUNT_SLACK))

    def hpoints(self) -> List[HPoint]:
        return [HPoint(z.real, z.imag) for z in self.points]

    def matrices(self) -> List[SL2Matrix]:
        return [SL2Matrix.from_array(m) for m in self.elements]


class CellIndex:
    """Rounded-cell hash of disc coordinates with a 3x3 neighbour lookup."""
    _OFFSET = np.int64(2 ** 31)

    def __init__(self, tol: float):
        self.tol = tol
        self.cells: Set[int] = set()

    def __len__(self) -> int:
        return len(self.cells)

    def _cells(self, w: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return np.floor(w.real / self.tol).astype(np.int64), np.floor(w.imag / self.tol).astype(np.int64)

    def _pack(self, ix: np.ndarray, iy: np.ndarray) -> np.ndarray:
        hi = (ix + self._OFFSET).astype(np.uint64) << np.uint64(32)
        return hi | (iy + self._OFFSET).astype(np.uint64)

    def _stored(self, keys: np.ndarray) -> np.ndarray:
        if not self.cells:
            return np.zeros(keys.shape, dtype=bool)
        return np.fromiter(map(self.cells.__contains__, keys.tolist()), dtype=bool, count=keys.size)

    def filter_new(self, w: np.ndarray) -> np.ndarray:
        """Mask of points with no stored neighbour and no earlier neighbour in the same batch."""
        if w.size == 0:
            return np.zeros(0, dtype=bool)
        ix, iy = self._cells(w)
        own = self._pack(ix, iy)
        uniq, first = np.unique(own, return_index=True)
        order = np.arange(w.size)
        new = np.ones(w.size, dtype=bool)
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                k = self._pack(ix + dx, iy + dy)
                new &= ~self._stored(k)
                pos = np.minimum(np.searchsorted(uniq, k), uniq.size - 1)
                new &= ~((uniq[pos] == k) & (first[pos] < order))
        return new

    def insert(self, w: np.ndarray) -> None:
        ix, iy = self._cells(w)
        self.cells.update(self._pack(ix, iy).tolist())


def _expand_chunk(frontier: np.ndarray, moves: np.ndarray, base: complex, limit: float):
    cand = np.einsum("nij,mjk->nmik", frontier, moves).reshape(-1, 2, 2)
    cand = renormalize_many(cand)
    pts = mobius_many(cand, base)
    dist = hyp_dist_many(pts, base)
    keep = dist <= limit
    return cand[keep], pts[keep], dist[keep]


def _assemble(radius, base, elems, pts, dists, tol, complete) -> OrbitBall:
    elems = np.concatenate(elems) if elems else np.zeros((0, 2, 2))
    pts = np.concatenate(pts) if pts else np.zeros(0, dtype=complex)
    dists = np.concatenate(dists) if dists else np.zeros(0)
    order = np.lexsort((np.angle(to_disc(pts, base.z)), dists))
    return OrbitBall(radius=radius, base=base, points=pts[order], elements=elems[order],
                     distances=dists[order], dedup_tol=tol, complete=complete)


def enumerate_orbit_ball(
    G: FuchsianGroup,
    base: HPoint = I_POINT,
    R: float = 0.0,
    dedup_tol: float = DEDUP_TOLERANCE,
    margin: Optional[float] = None,
    max_points: int = DEFAULT_POINT_CAP,
    workers: int = 1,
) -> OrbitBall:
    """
    Breadth-first enumeration of the orbit G . base inside B_R(base).

    Elements are expanded as gamma h s with h in the stabilizer of `base`
    and s a generator or inverse. A candidate is pruned once its point lies
    beyond R + margin, where margin defaults to twice the domain diameter.
    Frontier chunks may be expanded by parallel workers; insertion into the
    dedup index is serial and in chunk order, so the result does not depend
    on the worker count.

    Raises:
        EnumerationCapError: More than `max_points` points inside the pruning
            ball; the exception carries the partial ball flagged incomplete.
    """
    if R < 0:
        raise GeometryError(f"Orbit radius must be non-negative, got {R!r}")
    if margin is None:
        margin = 2.0 * G.domain_diameter() if G.domain is not None else 2.0 * float(G.displacements(base).max())
    limit = R + margin
    b = base.z
    stab = G.stabilizer(base)
    gens = G.generator_stack()
    moves = np.einsum("hij,sjk->hsik", stab, gens).reshape(-1, 2, 2)

    index = CellIndex(dedup_tol)
    index.insert(to_disc(np.array([b]), b))
    kept_elems, kept_pts, kept_d = [np.eye(2)[None]], [np.array([b])], [np.zeros(1)]
    frontier = np.eye(2)[None]
    total = 1
    level = 0
    expand = partial(_expand_chunk, moves=moves, base=b, limit=limit)
    while frontier.shape[0]:
        level += 1
        chunks = chunked(frontier, FRONTIER_CHUNK)
        new_frontier = []
        for elems, pts, dists in parallel_map(expand, chunks, workers=workers, desc=f"orbit level {level}"):
            if not pts.size:
                continue
            w = to_disc(pts, b)
            fresh = index.filter_new(w)
            if not fresh.any():
                continue
            index.insert(w[fresh])
            elems, pts, dists = elems[fresh], pts[fresh], dists[fresh]
            new_frontier.append(elems)
            inside = dists <= R + dedup_tol
            kept_elems.append(elems[inside])
            kept_pts.append(pts[inside])
            kept_d.append(dists[inside])
            total += int(fresh.sum())
            if total > max_points:
                partial_ball = _assemble(R, base, kept_elems, kept_pts, kept_d, dedup_tol, complete=False)
                raise EnumerationCapError(
                    f"Orbit enumeration exceeded {max_points} points at level {level} (R={R})",
                    partial=partial_ball,
                )
        frontier = np.concatenate(new_frontier) if new_frontier else np.zeros((0, 2, 2))
        logger.debug("orbit level %d: frontier=%d total=%d", level, frontier.shape[0], total)
    ball = _assemble(R, base, kept_elems, kept_pts, kept_d, dedup_tol, complete=True)
    logger.info("Enumerated %d orbit points within R=%g (%d BFS levels)", len(ball), R, level)
    return ball


def enumerate_words(
    G: FuchsianGroup,
    depth: int,
    base: HPoint = I_POINT,
    radius: Optional[float] = None,
    dedup_tol: float = DEDUP_TOLERANCE,
    max_elements: int = DEFAULT_WORD_CAP,
) -> OrbitBall:
    """
    Brute-force oracle: every group element of word length <= depth, no pruning.

    Elements are deduplicated in PSL(2,R) through their action on a generic
    point; the returned ball keeps the distinct orbit points of `base`
    within `radius` (all of them when radius is None).
    """
    marker = 0.1234 + 1.1731j
    gens = G.generator_stack()
    elem_index = CellIndex(dedup_tol)
    elem_index.insert(to_disc(np.array([marker]), marker))
    layers = [np.eye(2)[None]]
    frontier = layers[0]
    for level in range(depth):
        cand = renormalize_many(np.einsum("nij,mjk->nmik", frontier, gens).reshape(-1, 2, 2))
        w = to_disc(mobius_many(cand, marker), marker)
        fresh = elem_index.filter_new(w)
        elem_index.insert(w[fresh])
        frontier = cand[fresh]
        layers.append(frontier)
        if sum(layer.shape[0] for layer in layers) > max_elements:
            raise EnumerationCapError(f"Word enumeration exceeded {max_elements} elements at depth {level + 1}")
    elems = np.concatenate(layers)
    pts = mobius_many(elems, base.z)
    dists = hyp_dist_many(pts, base.z)
    keep = np.ones(pts.size, dtype=bool) if radius is None else dists <= radius + dedup_tol
    elems, pts, dists = elems[keep], pts[keep], dists[keep]
    point_index = CellIndex(dedup_tol)
    fresh = point_index.filter_new(to_disc(pts, base.z))
    r = float(dists.max()) if radius is None and dists.size else (radius or 0.0)
    return _assemble(r, base, [elems[fresh]], [pts[fresh]], [dists[fresh]], dedup_tol, complete=True)


# --- Sampling the invariant measure ---

def sample_domain_points(G: FuchsianGroup, n: int, rng: np.random.Generator,
                         method: str = "inverse_cdf") -> np.ndarray:
    """
    n points of D distributed with density y^-2 dx dy.

    "inverse_cdf" draws y from the y^-2 law on the bounding box and accepts
    points inside D; "rejection" draws y uniformly and accepts with
    probability (y0/y)^2. The two are independent samplers of the same law.
    """
    domain = G.require_domain()
    x0, x1, y0, y1 = domain.bounding_box()
    out: List[np.ndarray] = []
    have = drawn = 0
    batch = max(4 * n, 4096)
    while have < n:
        x = rng.uniform(x0, x1, batch)
        u = rng.random(batch)
        if method == "inverse_cdf":
            y = 1.0 / (1.0 / y0 - u * (1.0 / y0 - 1.0 / y1))
            keep = domain.contains(x + 1j * y)
        elif method == "rejection":
            y = y0 + u * (y1 - y0)
            keep = domain.contains(x + 1j * y) & (rng.random(batch) < (y0 / y) ** 2)
        else:
            raise SamplingError(f"Unknown sampling method '{method}'")
        drawn += batch
        out.append((x + 1j * y)[keep])
        have += int(keep.sum())
        if drawn >= 100_000 and have / drawn < MIN_ACCEPTANCE:
            raise SamplingError(
                f"Rejection efficiency {have / drawn:.2e} below {MIN_ACCEPTANCE:g} "
                f"(box x=[{x0:.4g},{x1:.4g}] y=[{y0:.4g},{y1:.4g}], {drawn} draws)"
            )
    return np.concatenate(out)[:n]


def _sample_chunk(item, G: FuchsianGroup, method: str) -> np.ndarray:
    size, seq = item
    rng = np.random.default_rng(seq)
    z = sample_domain_points(G, size, rng, method)
    angle = rng.uniform(0.0, 2.0 * math.pi, size)
    return iwasawa_many(z.real, z.imag, angle)


def sample_quotient_array(G: FuchsianGroup, n: int, seed: int, method: str = "inverse_cdf",
                          workers: int = 1) -> np.ndarray:
    """
    Stack of n Haar-distributed elements of G\\SL(2,R), deterministic given the seed.

    Every chunk of SAMPLE_CHUNK samples draws from its own substream of the
    seed, so the samples do not depend on the worker count.
    """
    if n < 1:
        raise SamplingError(f"Sample size must be >= 1, got {n}")
    sizes = chunk_sizes(n)
    items = list(zip(sizes, spawn_seeds(seed, len(sizes))))
    parts = parallel_map(partial(_sample_chunk, G=G, method=method), items, workers=workers, desc="sampling")
    return np.concatenate(parts)


def sample_quotient(G: FuchsianGroup, n: int, seed: int, method: str = "inverse_cdf") -> List[SL2Matrix]:
    return [SL2Matrix.from_array(m) for m in sample_quotient_array(G, n, seed, method)]


# --- Presets and group files ---

def load_group_file(path: str) -> FuchsianGroup:
    """
    Read a group file: one generator per line as four reals (row-major), plus
    `relation: i j ... ^ order`, `covol: value`, `stabilizer: value` and
    optional `name: value` lines; '#' starts a comment.
    """
    if not os.path.isfile(path):
        raise FileNotFoundError(f"Group file does not exist: {path}")
    generators: List[SL2Matrix] = []
    relations: List[Relation] = []
    covol: Optional[float] = None
    stabilizer = 1
    name = os.path.basename(path)
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                if ":" in line:
                    key, value = (part.strip() for part in line.split(":", 1))
                    if key == "relation":
                        word, _, order = value.partition("^")
                        relations.append((tuple(int(tok) for tok in word.split()), int(order or 1)))
                    elif key == "covol":
                        covol = float(value)
                    elif key == "stabilizer":
                        stabilizer = int(value)
                    elif key == "name":
                        name = value
                    else:
                        raise GroupError(f"unknown key '{key}'")
                else:
                    entries = [float(tok) for tok in line.split()]
                    if len(entries) != 4:
                        raise GroupError(f"expected 4 matrix entries, got {len(entries)}")
                    generators.append(SL2Matrix(*entries))
            except (ValueError, GeometryError, GroupError) as e:
                raise GroupError(f"{path}:{lineno}: {e}") from e
    if not generators:
        raise GroupError(f"{path}: no generators found")
    if covol is None:
        raise GroupError(f"{path}: missing 'covol:' line")
    return FuchsianGroup(generators=generators, relations=relations, covol_surface=covol,
                         stabilizer_order=stabilizer, name=name)


def resolve_group(spec: str) -> FuchsianGroup:
    """Resolve 'triangle:p,q,r' or 'file:PATH' into a group."""
    kind, _, arg = spec.partition(":")
    if kind == "triangle":
        try:
            p, q, r = (int(tok) for tok in arg.split(","))
        except ValueError as e:
            raise GroupError(f"Malformed triangle preset '{spec}'; expected triangle:p,q,r") from e
        return triangle_group(p, q, r)
    if kind == "file":
        return load_group_file(arg)
    raise GroupError(f"Unknown group preset '{spec}'")
