"""
Matrix-group kernel for SL(2,R).

Products with determinant renormalisation, Lie-algebra exponentials, the
geodesic and rotation flows, and the Cartan and Iwasawa decompositions.
Batched variants operate on stacks of shape (N, 2, 2).
"""

import math
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from .errors import GeometryError

DET_TOLERANCE = 1e-13
# Anything further from det = 1 than this is a caller bug, not rounding drift.
MAX_DET_DRIFT = 1e-6
EXP_TOLERANCE = 1e-14
CARTAN_TIE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class SL2Matrix:
    """A real 2x2 matrix [[a, b], [c, d]] with ad - bc = 1."""
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        det = float(self.a) * float(self.d) - float(self.b) * float(self.c)
        if not math.isfinite(det) or abs(det - 1.0) > MAX_DET_DRIFT:
            raise GeometryError(f"Matrix is not in SL(2,R): det = {det!r}")
        scale = math.sqrt(det) if abs(det - 1.0) > DET_TOLERANCE else 1.0
        for name in ("a", "b", "c", "d"):
            object.__setattr__(self, name, float(getattr(self, name)) / scale)

    @classmethod
    def identity(cls) -> "SL2Matrix":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def from_array(cls, arr) -> "SL2Matrix":
        m = np.asarray(arr, dtype=float)
        if m.shape != (2, 2):
            raise GeometryError(f"Expected a 2x2 array, got shape {m.shape}")
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    @property
    def array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    def __matmul__(self, other: "SL2Matrix") -> "SL2Matrix":
        return SL2Matrix(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def __neg__(self) -> "SL2Matrix":
        return SL2Matrix(-self.a, -self.b, -self.c, -self.d)

    def inverse(self) -> "SL2Matrix":
        return SL2Matrix(self.d, -self.b, -self.c, self.a)

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    @property
    def trace(self) -> float:
        return self.a + self.d

    def op_norm(self) -> float:
        """Largest singular value, from sigma_1 + sigma_2 and sigma_1 - sigma_2 when det = 1."""
        fro2 = self.a ** 2 + self.b ** 2 + self.c ** 2 + self.d ** 2
        return 0.5 * (math.sqrt(fro2 + 2.0) + math.sqrt(max(fro2 - 2.0, 0.0)))

    def allclose(self, other: "SL2Matrix", tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.array - other.array)) <= tol)

    def allclose_projective(self, other: "SL2Matrix", tol: float = 1e-12) -> bool:
        """Equality in PSL(2,R), i.e. up to a global sign."""
        return self.allclose(other, tol) or self.allclose(-other, tol)


@dataclass(frozen=True)
class LieVector:
    """A traceless matrix [[p, q], [r, -p]] in sl(2,R)."""
    p: float
    q: float
    r: float

    @classmethod
    def from_array(cls, arr) -> "LieVector":
        m = np.asarray(arr, dtype=float)
        if abs(m[0, 0] + m[1, 1]) > 1e-12:
            raise GeometryError(f"Lie algebra element must be traceless, trace = {m[0, 0] + m[1, 1]!r}")
        return cls(0.5 * (m[0, 0] - m[1, 1]), m[0, 1], m[1, 0])

    @property
    def array(self) -> np.ndarray:
        return np.array([[self.p, self.q], [self.r, -self.p]])

    def __add__(self, other: "LieVector") -> "LieVector":
        return LieVector(self.p + other.p, self.q + other.q, self.r + other.r)

    def __sub__(self, other: "LieVector") -> "LieVector":
        return LieVector(self.p - other.p, self.q - other.q, self.r - other.r)

    def __neg__(self) -> "LieVector":
        return LieVector(-self.p, -self.q, -self.r)

    def __mul__(self, scalar: float) -> "LieVector":
        return LieVector(scalar * self.p, scalar * self.q, scalar * self.r)

    __rmul__ = __mul__

    def bracket(self, other: "LieVector") -> "LieVector":
        m = self.array @ other.array - other.array @ self.array
        return LieVector.from_array(m)


X = LieVector(0.5, 0.0, 0.0)
THETA = LieVector(0.0, 0.5, -0.5)
U = LieVector(0.0, 1.0, 0.0)
V = LieVector(0.0, 0.0, 1.0)
Y = LieVector(0.0, -0.5, -0.5)


@dataclass(frozen=True)
class CartanFactors:
    """g = k1 . diag(e^{t/2}, e^{-t/2}) . k2 with k1, k2 rotations and t >= 0."""
    k1: SL2Matrix
    t: float
    k2: SL2Matrix

    def reconstruct(self) -> SL2Matrix:
        return self.k1 @ diagonal(self.t) @ self.k2


def rotation(phi: float) -> SL2Matrix:
    """k(phi) = [[cos phi, sin phi], [-sin phi, cos phi]]; acts on H fixing i."""
    c, s = math.cos(phi), math.sin(phi)
    return SL2Matrix(c, s, -s, c)


def diagonal(t: float) -> SL2Matrix:
    return SL2Matrix(math.exp(t / 2.0), 0.0, 0.0, math.exp(-t / 2.0))


def _exp_series(m: np.ndarray) -> np.ndarray:
    """exp of a 2x2 matrix by scaling and squaring with a Taylor core."""
    norm = float(np.max(np.sum(np.abs(m), axis=1)))
    squarings = max(0, int(math.ceil(math.log2(norm / 0.5)))) if norm > 0.5 else 0
    scaled = m / (2.0 ** squarings)
    result = np.eye(2)
    term = np.eye(2)
    for k in range(1, 40):
        term = term @ scaled / k
        result = result + term
        if np.max(np.abs(term)) < EXP_TOLERANCE * np.max(np.abs(result)):
            break
    for _ in range(squarings):
        result = result @ result
        det = result[0, 0] * result[1, 1] - result[0, 1] * result[1, 0]
        result = result / math.sqrt(det)
    return result


def exp_lie(W: LieVector, s: float = 1.0) -> SL2Matrix:
    """exp(sW), using closed forms for X, Theta, U and V."""
    if W == X:
        return diagonal(s)
    if W == THETA:
        return rotation(s / 2.0)
    if W == U:
        return SL2Matrix(1.0, s, 0.0, 1.0)
    if W == V:
        return SL2Matrix(1.0, 0.0, s, 1.0)
    return SL2Matrix.from_array(_exp_series(s * W.array))


def geodesic_flow(g: SL2Matrix, t: float) -> SL2Matrix:
    return g @ diagonal(t)


def rotation_flow(g: SL2Matrix, s: float) -> SL2Matrix:
    return g @ rotation(s / 2.0)


def adjoint(g: SL2Matrix, W: LieVector) -> LieVector:
    """Ad_g W = g W g^{-1}."""
    return LieVector.from_array(g.array @ W.array @ g.inverse().array)


def cartan(g: SL2Matrix) -> CartanFactors:
    """
    Cartan decomposition g = k1 a(t) k2 from the eigen-decomposition of g^T g.

    The top eigenvector v of g^T g is the first row of k2; the first column
    of k1 is g v / |g v|. When the singular values tie (t = 0) the
    convention is k1 = g, k2 = I.
    """
    gm = g.array
    sigma = g.op_norm()
    t = 2.0 * math.log(sigma)
    _, vecs = np.linalg.eigh(gm.T @ gm)
    if sigma ** 2 - sigma ** -2 <= CARTAN_TIE_TOLERANCE:
        return CartanFactors(k1=g, t=0.0, k2=SL2Matrix.identity())
    v = vecs[:, 1]
    k2 = SL2Matrix(v[0], v[1], -v[1], v[0])
    u = gm @ v
    u = u / math.hypot(u[0], u[1])
    k1 = SL2Matrix(u[0], -u[1], u[1], u[0])
    return CartanFactors(k1=k1, t=t, k2=k2)


def cartan_time(g: SL2Matrix) -> float:
    """t(g) = 2 log ||g||_op, which is also d(g.i, i)."""
    return 2.0 * math.log(g.op_norm())


def iwasawa_coords(x: float, y: float, angle: float) -> SL2Matrix:
    """g = n_x a_y k(angle) with g.i = x + iy; angle in [0, 2pi) covers SL(2,R) once."""
    if not y > 0:
        raise GeometryError(f"Iwasawa coordinate y must be positive, got {y!r}")
    sy = math.sqrt(y)
    n_a = SL2Matrix(sy, x / sy, 0.0, 1.0 / sy)
    return n_a @ rotation(angle)


def iwasawa_from_matrix(g: SL2Matrix) -> Tuple[float, float, float]:
    """Inverse of `iwasawa_coords`: returns (x, y, angle) with angle in [0, 2pi)."""
    denom = g.c ** 2 + g.d ** 2
    y = 1.0 / denom
    x = (g.a * g.c + g.b * g.d) / denom
    # k(angle) has bottom row (-sin, cos) scaled by sqrt(y) inside g.
    angle = math.atan2(-g.c, g.d) % (2.0 * math.pi)
    return x, y, angle


# --- Batched helpers on (N, 2, 2) stacks ---

Stack = np.ndarray
MatrixLike = Union[SL2Matrix, np.ndarray]


def as_stack(g: MatrixLike) -> np.ndarray:
    if isinstance(g, SL2Matrix):
        return g.array[None, :, :]
    arr = np.asarray(g, dtype=float)
    return arr[None, :, :] if arr.ndim == 2 else arr


def stack_of(matrices) -> np.ndarray:
    return np.stack([m.array for m in matrices]) if matrices else np.zeros((0, 2, 2))


def rotation_many(phi: np.ndarray) -> np.ndarray:
    phi = np.asarray(phi, dtype=float)
    c, s = np.cos(phi), np.sin(phi)
    out = np.empty(phi.shape + (2, 2))
    out[..., 0, 0] = c
    out[..., 0, 1] = s
    out[..., 1, 0] = -s
    out[..., 1, 1] = c
    return out


def exp_lie_many(W: LieVector, s: np.ndarray) -> np.ndarray:
    """Stack of exp(s_j W) for a vector of parameters s."""
    s = np.asarray(s, dtype=float)
    if W == THETA:
        return rotation_many(s / 2.0)
    out = np.zeros(s.shape + (2, 2))
    if W == X:
        out[..., 0, 0] = np.exp(s / 2.0)
        out[..., 1, 1] = np.exp(-s / 2.0)
        return out
    if W == U or W == V:
        out[..., 0, 0] = 1.0
        out[..., 1, 1] = 1.0
        out[..., 0, 1] = s if W == U else 0.0
        out[..., 1, 0] = s if W == V else 0.0
        return out
    return np.stack([exp_lie(W, float(si)).array for si in s.ravel()]).reshape(s.shape + (2, 2))


def iwasawa_many(x: np.ndarray, y: np.ndarray, angle: np.ndarray) -> np.ndarray:
    """Vectorised `iwasawa_coords`."""
    x, y, angle = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, y, angle)))
    if np.any(y <= 0):
        raise GeometryError("Iwasawa coordinate y must be positive")
    sy = np.sqrt(y)
    na = np.zeros(x.shape + (2, 2))
    na[..., 0, 0] = sy
    na[..., 0, 1] = x / sy
    na[..., 1, 1] = 1.0 / sy
    return na @ rotation_many(angle)


def renormalize_many(gs: np.ndarray) -> np.ndarray:
    det = gs[..., 0, 0] * gs[..., 1, 1] - gs[..., 0, 1] * gs[..., 1, 0]
    return gs / np.sqrt(det)[..., None, None]


def op_norm_many(gs: np.ndarray) -> np.ndarray:
    fro2 = np.sum(gs ** 2, axis=(-2, -1))
    return 0.5 * (np.sqrt(fro2 + 2.0) + np.sqrt(np.maximum(fro2 - 2.0, 0.0)))


def cartan_many(gs: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised `cartan`: returns stacks (k1, t, k2)."""
    gs = as_stack(gs)
    sigma = op_norm_many(gs)
    t = 2.0 * np.log(sigma)
    m = np.einsum("nji,njk->nik", gs, gs)
    phi = 0.5 * np.arctan2(2.0 * m[:, 0, 1], m[:, 0, 0] - m[:, 1, 1])
    v = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
    k2 = np.empty_like(gs)
    k2[:, 0, 0] = v[:, 0]
    k2[:, 0, 1] = v[:, 1]
    k2[:, 1, 0] = -v[:, 1]
    k2[:, 1, 1] = v[:, 0]
    u = np.einsum("nij,nj->ni", gs, v)
    u = u / np.hypot(u[:, 0], u[:, 1])[:, None]
    k1 = np.empty_like(gs)
    k1[:, 0, 0] = u[:, 0]
    k1[:, 0, 1] = -u[:, 1]
    k1[:, 1, 0] = u[:, 1]
    k1[:, 1, 1] = u[:, 0]
    tie = sigma ** 2 - sigma ** -2 <= CARTAN_TIE_TOLERANCE
    if np.any(tie):
        k1[tie] = gs[tie]
        k2[tie] = np.eye(2)
        t = np.where(tie, 0.0, t)
    return k1, t, k2
