"""Centrally symmetric convex bodies as evaluation oracles.

Every body exposes a support function ``h(u) = sup_{x in K} <x,u>``, the
gauge (Minkowski functional) ``||x|| = inf{t > 0 : x in tK}``, support
points (maximizers of linear functionals), and an exact polar body.
Polytopal families carry vertex data, quadratic families carry the matrix
``A`` of ``K = {x : x^T A x <= 1}``, and the remaining families have
structure-specific closed forms.  All oracles accept batches of row
vectors; bodies are immutable after construction and safe to share across
workers.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Sequence

import numpy as np

__all__ = [
    "Family",
    "FamilySpec",
    "ConvexBody",
    "BodyError",
    "BracketError",
    "MissingOracleError",
    "make_body",
    "parse_body",
    "polar",
    "section_support",
    "section_support_batch",
    "rotate_body",
    "scale_body",
    "make_box_with_halfsides",
]


class BodyError(ValueError):
    """Invalid family parameters or malformed oracle inputs."""


class BracketError(RuntimeError):
    """The section-support line search could not bracket a minimum."""


class MissingOracleError(RuntimeError):
    """An operation needed an exact route this body does not carry."""


class Family(str, Enum):
    CUBE = "cube"
    CROSS_POLYTOPE = "cross"
    LP_BALL = "lp"
    EUCLIDEAN_BALL = "ball"
    SYMPLECTIC_ELLIPSOID = "ellipsoid"
    SYMPLECTIC_BOX = "box"
    BALL_PRODUCT = "ballproduct"
    V_POLYTOPE = "vpolytope"
    ELLIPSOID_MATRIX = "ellmatrix"


@dataclass(frozen=True)
class FamilySpec:
    """Parametric descriptor of a body family.

    ``axes`` holds the ellipsoid/box parameters (ascending), ``p`` the
    lp exponent (may be ``inf``), ``radius``/``lam`` the two ball-product
    radii, ``vertices``/``matrix`` the explicit V-polytope and quadratic
    data.
    """

    kind: Family
    dim: int
    p: float | None = None
    radius: float | None = None
    lam: float | None = None
    axes: tuple[float, ...] | None = None
    vertices: tuple[tuple[float, ...], ...] | None = None
    matrix: tuple[tuple[float, ...], ...] | None = None

    def __post_init__(self):
        if self.dim < 2 or self.dim % 2 != 0:
            raise BodyError(f"dim must be a positive even integer, got {self.dim}")
        if self.kind in (Family.SYMPLECTIC_ELLIPSOID, Family.SYMPLECTIC_BOX):
            a = self.axes
            if a is None or len(a) != self.dim // 2:
                raise BodyError("axis list must have dim/2 entries")
            if any(x <= 0 for x in a):
                raise BodyError("axes must be strictly positive")
            if any(a[i] > a[i + 1] for i in range(len(a) - 1)):
                raise BodyError("axes must be sorted ascending")
        if self.kind is Family.LP_BALL:
            if self.p is None or not (self.p >= 1):
                raise BodyError("lp exponent must satisfy p >= 1")
        if self.kind is Family.EUCLIDEAN_BALL:
            if self.radius is None or self.radius <= 0:
                raise BodyError("ball radius must be positive")
        if self.kind is Family.BALL_PRODUCT:
            if self.dim < 4:
                raise BodyError("ball product needs dim >= 4")
            if self.lam is None or self.lam <= 0 or (self.radius or 1.0) <= 0:
                raise BodyError("ball product radii must be positive")
        if self.kind is Family.V_POLYTOPE:
            V = np.asarray(self.vertices, dtype=float)
            if V.ndim != 2 or V.shape[1] != self.dim:
                raise BodyError("vertex list must be (k, dim)")
            _check_symmetric_vertices(V)
        if self.kind is Family.ELLIPSOID_MATRIX:
            M = np.asarray(self.matrix, dtype=float)
            _check_spd(M, self.dim)

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind.value, "dim": self.dim}
        for name in ("p", "radius", "lam"):
            v = getattr(self, name)
            if v is not None:
                out[name] = v
        if self.axes is not None:
            out["axes"] = list(self.axes)
        if self.vertices is not None:
            out["vertices"] = [list(v) for v in self.vertices]
        if self.matrix is not None:
            out["matrix"] = [list(r) for r in self.matrix]
        return out


def _check_symmetric_vertices(V: np.ndarray) -> None:
    if np.linalg.matrix_rank(V) < V.shape[1]:
        raise BodyError("vertex list does not span the space")
    for v in V:
        d = np.abs(V + v).max(axis=1)
        if d.min() > 1e-12 * (1.0 + np.abs(v).max()):
            raise BodyError("vertex list is not centrally symmetric")


def _check_spd(M: np.ndarray, dim: int) -> None:
    if M.shape != (dim, dim):
        raise BodyError("matrix shape must be (dim, dim)")
    if np.abs(M - M.T).max() > 1e-10 * max(1.0, np.abs(M).max()):
        raise BodyError("matrix must be symmetric")
    if np.linalg.eigvalsh(M).min() <= 0:
        raise BodyError("matrix must be positive definite")


def _rows(x) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        return arr[None, :], True
    return arr, False


class ConvexBody:
    """Base class; concrete families override the batched oracles."""

    def __init__(self, dim: int, spec: FamilySpec | None = None, label: str = ""):
        self.dim = int(dim)
        self.spec = spec
        self.label = label or (spec.kind.value if spec else "body")
        self._polar_cache: "ConvexBody | None" = None

    # ---- batched oracles (rows of shape (k, dim)) --------------------
    def support_batch(self, U: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def gauge_batch(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def support_point_batch(self, U: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    # ---- scalar conveniences -----------------------------------------
    def support(self, u) -> float:
        U, _ = _rows(u)
        return float(self.support_batch(U)[0])

    def gauge(self, x) -> float:
        X, _ = _rows(x)
        return float(self.gauge_batch(X)[0])

    def support_point(self, u) -> np.ndarray:
        U, _ = _rows(u)
        return self.support_point_batch(U)[0]

    # ---- structure accessors (None when absent) ----------------------
    def vertex_array(self) -> np.ndarray | None:
        return None

    def box_halfsides(self) -> np.ndarray | None:
        return None

    def quad_form(self) -> np.ndarray | None:
        return None

    def hull_balls(self) -> tuple[np.ndarray, float, np.ndarray, float] | None:
        """(basis_U, radius_U, basis_W, radius_W) when K = conv of two balls."""
        return None

    def vertex_iter(self) -> Iterator[np.ndarray] | None:
        V = self.vertex_array()
        if V is None:
            return None
        return iter(V)

    # ---- exact metric data -------------------------------------------
    def circumradius_exact(self) -> float | None:
        V = self.vertex_array()
        if V is not None:
            return float(np.linalg.norm(V, axis=1).max())
        return None

    def volume_exact(self) -> float | None:
        return None

    def _make_polar(self) -> "ConvexBody":
        raise MissingOracleError(f"no polar construction for {self.label}")

    def polar(self) -> "ConvexBody":
        if self._polar_cache is None:
            self._polar_cache = self._make_polar()
            self._polar_cache._polar_cache = self
        return self._polar_cache

    def __repr__(self):
        return f"<{type(self).__name__} {self.label} dim={self.dim}>"


class SignBoxBody(ConvexBody):
    """Coordinate box prod_j [-s_j, s_j]; the cube is s = (1, ..., 1).

    The 2^dim vertices s * {+-1}^dim are exposed through an iterator;
    explicit arrays are only materialized at small dimension, and callers
    needing a max over vertices must use the per-coordinate closed form
    above dimension 20.
    """

    EXPLICIT_VERTEX_LIMIT = 12

    def __init__(self, halfsides, spec=None, label="box"):
        s = np.asarray(halfsides, dtype=float)
        if s.ndim != 1 or np.any(s <= 0):
            raise BodyError("halfsides must be positive")
        super().__init__(s.size, spec, label)
        self.halfsides = s

    def support_batch(self, U):
        return np.abs(U) @ self.halfsides

    def gauge_batch(self, X):
        return np.abs(X / self.halfsides).max(axis=1)

    def support_point_batch(self, U):
        sgn = np.where(U >= 0.0, 1.0, -1.0)  # ties break positive
        return sgn * self.halfsides

    def box_halfsides(self):
        return self.halfsides

    def vertex_array(self):
        if self.dim > self.EXPLICIT_VERTEX_LIMIT:
            return None
        signs = np.array(list(itertools.product((1.0, -1.0), repeat=self.dim)))
        return signs * self.halfsides

    def vertex_iter(self):
        s = self.halfsides
        return (np.asarray(sig, dtype=float) * s
                for sig in itertools.product((1.0, -1.0), repeat=self.dim))

    def circumradius_exact(self):
        return float(np.linalg.norm(self.halfsides))

    def volume_exact(self):
        return float(np.prod(2.0 * self.halfsides))

    def _make_polar(self):
        w = 1.0 / self.halfsides
        V = np.vstack([np.diag(w), -np.diag(w)])
        spec = None
        if self.spec is not None and self.spec.kind is Family.CUBE:
            spec = FamilySpec(Family.CROSS_POLYTOPE, self.dim)
        return VertexPolytopeBody(V, spec=spec, label=f"polar({self.label})",
                                  axis_weights=w)


class VertexPolytopeBody(ConvexBody):
    """conv(V) for an explicit centrally symmetric vertex list."""

    def __init__(self, V, spec=None, label="vpolytope", axis_weights=None):
        V = np.asarray(V, dtype=float)
        _check_symmetric_vertices(V)
        super().__init__(V.shape[1], spec, label)
        self.vertices = V
        # set when the vertices are +-w_j e_j (cross-polytope pattern)
        self.axis_weights = None if axis_weights is None else np.asarray(axis_weights, float)

    def support_batch(self, U):
        return (U @ self.vertices.T).max(axis=1)

    def gauge_batch(self, X):
        out = np.empty(X.shape[0])
        for i, x in enumerate(X):
            out[i], _ = _hpoly_support(self.vertices, x)
        return out

    def support_point_batch(self, U):
        idx = np.argmax(U @ self.vertices.T, axis=1)
        return self.vertices[idx]

    def vertex_array(self):
        return self.vertices

    def circumradius_exact(self):
        return float(np.linalg.norm(self.vertices, axis=1).max())

    def _make_polar(self):
        if self.axis_weights is not None:
            s = 1.0 / self.axis_weights
            spec = None
            if self.spec is not None and self.spec.kind is Family.CROSS_POLYTOPE:
                spec = FamilySpec(Family.CUBE, self.dim)
            return SignBoxBody(s, spec=spec, label=f"polar({self.label})")
        return HPolytopeBody(self.vertices, label=f"polar({self.label})")


class HPolytopeBody(ConvexBody):
    """{y : <v_i, y> <= 1 for all i} — the polar of an explicit V-polytope.

    Support values and support points come from a linear program, so this
    body is exact but slow; it only appears as the polar of user-supplied
    V-polytopes.
    """

    def __init__(self, V, label="hpolytope"):
        V = np.asarray(V, dtype=float)
        super().__init__(V.shape[1], None, label)
        self.facet_vertices = V

    def support_batch(self, U):
        out = np.empty(U.shape[0])
        for i, u in enumerate(U):
            out[i], _ = _hpoly_support(self.facet_vertices, u)
        return out

    def gauge_batch(self, X):
        return (X @ self.facet_vertices.T).max(axis=1)

    def support_point_batch(self, U):
        out = np.empty_like(U, dtype=float)
        for i, u in enumerate(U):
            _, out[i] = _hpoly_support(self.facet_vertices, u)
        return out

    def _make_polar(self):
        return VertexPolytopeBody(self.facet_vertices, label=f"polar({self.label})")


def _hpoly_support(V: np.ndarray, u: np.ndarray) -> tuple[float, np.ndarray]:
    """max <u, y> subject to V y <= 1 (V already contains +-v)."""
    from scipy.optimize import linprog

    if not np.any(u):
        return 0.0, np.zeros_like(u)
    res = linprog(-u, A_ub=V, b_ub=np.ones(V.shape[0]),
                  bounds=[(None, None)] * u.size, method="highs")
    if not res.success:
        raise MissingOracleError(f"support LP failed: {res.message}")
    return float(-res.fun), np.asarray(res.x)


class EllipsoidBody(ConvexBody):
    """{x : x^T A x <= 1} for symmetric positive definite A."""

    def __init__(self, A, spec=None, label="ellipsoid"):
        A = np.asarray(A, dtype=float)
        _check_spd(A, A.shape[0])
        super().__init__(A.shape[0], spec, label)
        self.A = A
        self.A_inv = np.linalg.inv(A)
        self.A_inv = 0.5 * (self.A_inv + self.A_inv.T)
        self.eigvals, self.eigvecs = np.linalg.eigh(A)

    def support_batch(self, U):
        return np.sqrt(np.maximum(np.einsum("ij,jk,ik->i", U, self.A_inv, U), 0.0))

    def gauge_batch(self, X):
        return np.sqrt(np.maximum(np.einsum("ij,jk,ik->i", X, self.A, X), 0.0))

    def support_point_batch(self, U):
        h = self.support_batch(U)
        Y = U @ self.A_inv
        with np.errstate(invalid="ignore", divide="ignore"):
            out = np.where(h[:, None] > 0, Y / np.where(h == 0, 1.0, h)[:, None], 0.0)
        return out

    def quad_form(self):
        return self.A

    def circumradius_exact(self):
        return float(1.0 / math.sqrt(self.eigvals[0]))

    def volume_exact(self):
        return float(_ball_volume(self.dim) / math.sqrt(np.prod(self.eigvals)))

    def _make_polar(self):
        spec = None
        if self.spec is not None:
            spec = FamilySpec(Family.ELLIPSOID_MATRIX, self.dim,
                              matrix=tuple(map(tuple, self.A_inv)))
        return EllipsoidBody(self.A_inv, spec=spec, label=f"polar({self.label})")


class LpBallBody(ConvexBody):
    """radius * unit lp ball, 1 <= p <= inf (p in {1, 2, inf} get
    specialized classes from make_body)."""

    def __init__(self, p: float, radius: float = 1.0, spec=None, label="lp"):
        if not (p >= 1):
            raise BodyError("p must be >= 1")
        if spec is None:
            raise BodyError("LpBallBody requires a spec")
        super().__init__(spec.dim, spec, label)
        self.p = float(p)
        self.radius = float(radius)
        self.q = math.inf if p == 1 else (1.0 if math.isinf(p) else p / (p - 1.0))

    def _norm(self, X, p):
        if math.isinf(p):
            return np.abs(X).max(axis=1)
        return (np.abs(X) ** p).sum(axis=1) ** (1.0 / p)

    def support_batch(self, U):
        return self.radius * self._norm(U, self.q)

    def gauge_batch(self, X):
        return self._norm(X, self.p) / self.radius

    def support_point_batch(self, U):
        q = self.q
        if math.isinf(q):
            i = np.argmax(np.abs(U), axis=1)
            out = np.zeros_like(U, dtype=float)
            rows = np.arange(U.shape[0])
            s = np.where(U[rows, i] >= 0.0, 1.0, -1.0)
            out[rows, i] = s
            return self.radius * out
        if q == 1.0:
            return self.radius * np.where(U >= 0.0, 1.0, -1.0)
        nq = self._norm(U, q)
        nq = np.where(nq == 0, 1.0, nq)
        Y = np.sign(U) * (np.abs(U) / nq[:, None]) ** (q - 1.0)
        return self.radius * Y

    def circumradius_exact(self):
        d = self.dim ** (0.5 - 1.0 / self.p) if not math.isinf(self.p) else math.sqrt(self.dim)
        return self.radius * max(1.0, d)

    def _make_polar(self):
        spec = FamilySpec(Family.LP_BALL, self.dim, p=self.q)
        return LpBallBody(self.q, 1.0 / self.radius, spec=spec, label=f"polar({self.label})")


class ProductBallsBody(ConvexBody):
    """B_U(r_u) x B_W(r_w) for orthogonal complementary subspaces U, W."""

    def __init__(self, basis_u, r_u, basis_w, r_w, spec=None, label="ballproduct"):
        basis_u = np.asarray(basis_u, dtype=float)
        basis_w = np.asarray(basis_w, dtype=float)
        super().__init__(basis_u.shape[0], spec, label)
        self.basis_u, self.basis_w = basis_u, basis_w
        self.r_u, self.r_w = float(r_u), float(r_w)

    def _parts(self, X):
        pu = np.linalg.norm(X @ self.basis_u, axis=1)
        pw = np.linalg.norm(X @ self.basis_w, axis=1)
        return pu, pw

    def support_batch(self, U):
        pu, pw = self._parts(U)
        return self.r_u * pu + self.r_w * pw

    def gauge_batch(self, X):
        pu, pw = self._parts(X)
        return np.maximum(pu / self.r_u, pw / self.r_w)

    def support_point_batch(self, U):
        pu, pw = self._parts(U)
        cu = U @ self.basis_u
        cw = U @ self.basis_w
        cu = np.where(pu[:, None] > 0, cu / np.where(pu == 0, 1.0, pu)[:, None], 0.0)
        cw = np.where(pw[:, None] > 0, cw / np.where(pw == 0, 1.0, pw)[:, None], 0.0)
        return self.r_u * cu @ self.basis_u.T + self.r_w * cw @ self.basis_w.T

    def circumradius_exact(self):
        return math.hypot(self.r_u, self.r_w)

    def _make_polar(self):
        return HullBallsBody(self.basis_u, 1.0 / self.r_u, self.basis_w, 1.0 / self.r_w,
                             label=f"polar({self.label})")


class HullBallsBody(ConvexBody):
    """conv(B_U(r_u) u B_W(r_w)) — the polar of a product of balls."""

    def __init__(self, basis_u, r_u, basis_w, r_w, spec=None, label="ballhull"):
        basis_u = np.asarray(basis_u, dtype=float)
        basis_w = np.asarray(basis_w, dtype=float)
        super().__init__(basis_u.shape[0], spec, label)
        self.basis_u, self.basis_w = basis_u, basis_w
        self.r_u, self.r_w = float(r_u), float(r_w)

    def _parts(self, X):
        return np.linalg.norm(X @ self.basis_u, axis=1), np.linalg.norm(X @ self.basis_w, axis=1)

    def support_batch(self, U):
        pu, pw = self._parts(U)
        return np.maximum(self.r_u * pu, self.r_w * pw)

    def gauge_batch(self, X):
        pu, pw = self._parts(X)
        return pu / self.r_u + pw / self.r_w

    def support_point_batch(self, U):
        pu, pw = self._parts(U)
        cu = U @ self.basis_u
        cw = U @ self.basis_w
        cu = np.where(pu[:, None] > 0, cu / np.where(pu == 0, 1.0, pu)[:, None], 0.0)
        cw = np.where(pw[:, None] > 0, cw / np.where(pw == 0, 1.0, pw)[:, None], 0.0)
        take_u = (self.r_u * pu >= self.r_w * pw)[:, None]
        return np.where(take_u, self.r_u * cu @ self.basis_u.T, self.r_w * cw @ self.basis_w.T)

    def hull_balls(self):
        return self.basis_u, self.r_u, self.basis_w, self.r_w

    def circumradius_exact(self):
        return max(self.r_u, self.r_w)

    def _make_polar(self):
        return ProductBallsBody(self.basis_u, 1.0 / self.r_u, self.basis_w, 1.0 / self.r_w,
                                label=f"polar({self.label})")


# ---------------------------------------------------------------------------
# construction


def _ball_volume(m: int) -> float:
    return math.pi ** (m / 2.0) / math.gamma(m / 2.0 + 1.0)


def make_body(spec: FamilySpec) -> ConvexBody:
    """Build the oracle bundle for a family descriptor."""
    kind, dim = spec.kind, spec.dim
    if kind is Family.CUBE:
        return SignBoxBody(np.ones(dim), spec=spec, label="cube")
    if kind is Family.CROSS_POLYTOPE:
        V = np.vstack([np.eye(dim), -np.eye(dim)])
        return VertexPolytopeBody(V, spec=spec, label="cross", axis_weights=np.ones(dim))
    if kind is Family.EUCLIDEAN_BALL:
        r = float(spec.radius)
        return EllipsoidBody(np.eye(dim) / r**2, spec=spec, label="ball")
    if kind is Family.LP_BALL:
        p = float(spec.p)
        if p == 1.0:
            V = np.vstack([np.eye(dim), -np.eye(dim)])
            return VertexPolytopeBody(V, spec=spec, label="lp1", axis_weights=np.ones(dim))
        if math.isinf(p):
            return SignBoxBody(np.ones(dim), spec=spec, label="lpinf")
        if p == 2.0:
            return EllipsoidBody(np.eye(dim), spec=spec, label="lp2")
        return LpBallBody(p, 1.0, spec=spec, label=f"lp{p:g}")
    if kind is Family.SYMPLECTIC_ELLIPSOID:
        a = np.asarray(spec.axes, dtype=float)
        A = np.diag(np.r_[math.pi / a, math.pi / a])
        return EllipsoidBody(A, spec=spec, label="ellipsoid")
    if kind is Family.ELLIPSOID_MATRIX:
        return EllipsoidBody(np.asarray(spec.matrix, dtype=float), spec=spec, label="ellmatrix")
    if kind is Family.SYMPLECTIC_BOX:
        # centered box: each complex plane contributes two coordinates of
        # half-side sqrt(a_i)/2 (translation-insensitive substitute for the
        # open corner-anchored box)
        a = np.asarray(spec.axes, dtype=float)
        s = np.r_[np.sqrt(a) / 2.0, np.sqrt(a) / 2.0]
        return SignBoxBody(s, spec=spec, label="box")
    if kind is Family.BALL_PRODUCT:
        n = dim // 2
        idx_u = [0, n]
        idx_w = [j for j in range(dim) if j not in idx_u]
        basis_u = np.eye(dim)[:, idx_u]
        basis_w = np.eye(dim)[:, idx_w]
        r = float(spec.radius if spec.radius is not None else 1.0)
        return ProductBallsBody(basis_u, r, basis_w, float(spec.lam), spec=spec,
                                label="ballproduct")
    if kind is Family.V_POLYTOPE:
        return VertexPolytopeBody(np.asarray(spec.vertices, dtype=float), spec=spec,
                                  label="vpolytope")
    raise BodyError(f"unknown family {kind}")


def make_box_with_halfsides(halfsides) -> ConvexBody:
    """Coordinate box with arbitrary per-coordinate half-sides."""
    return SignBoxBody(halfsides, label="box")


def polar(body: ConvexBody) -> ConvexBody:
    return body.polar()


# ---------------------------------------------------------------------------
# parsing


def parse_body(text: str) -> FamilySpec:
    """Parse the compact CLI grammar, e.g. ``cube:8``, ``lp:8:1.5``,
    ``ellipsoid:1,4``, ``ballproduct:8:100``, or a JSON object for the
    V-polytope / matrix-ellipsoid forms."""
    text = text.strip()
    if text.startswith("{"):
        obj = json.loads(text)
        kind = Family(obj.pop("kind"))
        dim = int(obj.pop("dim"))
        if kind is Family.V_POLYTOPE:
            return FamilySpec(kind, dim, vertices=tuple(map(tuple, obj["vertices"])))
        if kind is Family.ELLIPSOID_MATRIX:
            return FamilySpec(kind, dim, matrix=tuple(map(tuple, obj["matrix"])))
        raise BodyError(f"JSON form not supported for {kind}")
    parts = text.split(":")
    name = parts[0].lower()
    try:
        if name in ("cube", "cross"):
            (dim,) = parts[1:]
            kind = Family.CUBE if name == "cube" else Family.CROSS_POLYTOPE
            return FamilySpec(kind, int(dim))
        if name == "lp":
            dim, p = parts[1:]
            return FamilySpec(Family.LP_BALL, int(dim), p=float(p))
        if name == "ball":
            dim, r = parts[1:]
            return FamilySpec(Family.EUCLIDEAN_BALL, int(dim), radius=float(r))
        if name == "ellipsoid":
            (axes,) = parts[1:]
            a = tuple(float(x) for x in axes.split(","))
            return FamilySpec(Family.SYMPLECTIC_ELLIPSOID, 2 * len(a), axes=a)
        if name == "box":
            (axes,) = parts[1:]
            a = tuple(float(x) for x in axes.split(","))
            return FamilySpec(Family.SYMPLECTIC_BOX, 2 * len(a), axes=a)
        if name == "ballproduct":
            dim, lam = parts[1:]
            return FamilySpec(Family.BALL_PRODUCT, int(dim), radius=1.0, lam=float(lam))
    except BodyError:
        raise
    except Exception as exc:
        raise BodyError(f"cannot parse body spec {text!r}: {exc}") from exc
    raise BodyError(f"unknown body family in {text!r}")


# ---------------------------------------------------------------------------
# hyperplane sections


_INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0  # 0.618...


def section_support_batch(body: ConvexBody, v, U, tol_scale: float = 1e-9) -> np.ndarray:
    """h of the section K n v-perp at directions U (rows), via the infimal
    projection min_t h_K(u + t v).

    The map t -> h_K(u + t v) is convex and coercive for a bounded
    symmetric body, so the minimizer lies in [-T, T] with
    T = 2 h(u) / h(v); golden-section search then needs a fixed number of
    shrink steps.  Plateaus from piecewise-linear support functions are
    benign at the stated tolerance.
    """
    v = np.asarray(v, dtype=float)
    U = np.asarray(U, dtype=float)
    norms = np.linalg.norm(U, axis=1)
    dots = np.abs(U @ v) / max(float(np.linalg.norm(v)), 1e-300)
    if np.any(dots > 1e-12 * np.maximum(norms, 1e-300) + 1e-300):
        raise BodyError("directions must be orthogonal to the section normal")
    hv = body.support(v)
    hv_neg = body.support(-v)
    if not (np.isfinite(hv) and hv > 0 and np.isfinite(hv_neg)):
        raise BracketError("support along the section normal is degenerate")
    hu = body.support_batch(U)
    T = 2.0 * hu / min(hv, hv_neg) + 1e-300
    tol_t = tol_scale * (1.0 + hu) / min(hv, hv_neg)

    a = -T
    b = T.copy()
    x1 = b - _INV_GOLDEN * (b - a)
    x2 = a + _INV_GOLDEN * (b - a)
    f1 = body.support_batch(U + x1[:, None] * v)
    f2 = body.support_batch(U + x2[:, None] * v)
    best = np.minimum(hu, np.minimum(f1, f2))  # t = 0 is always feasible
    with np.errstate(divide="ignore"):
        need = np.log(np.maximum(tol_t / np.maximum(b - a, 1e-300), 1e-300)) / math.log(_INV_GOLDEN)
    n_iter = int(min(200.0, max(0.0, float(np.max(need)))) + 1)
    for _ in range(n_iter):
        right = f1 <= f2  # minimum in [a, x2]
        b = np.where(right, x2, b)
        a = np.where(right, a, x1)
        probe = np.where(right, b - _INV_GOLDEN * (b - a), a + _INV_GOLDEN * (b - a))
        fp = body.support_batch(U + probe[:, None] * v)
        x1, x2 = np.where(right, probe, x2), np.where(right, x1, probe)
        f1, f2 = np.where(right, fp, f2), np.where(right, f1, fp)
        best = np.minimum(best, fp)
    return np.maximum(best, 0.0)


def section_support(body: ConvexBody, v, u, tol_scale: float = 1e-9) -> float:
    """Support value of K n v-perp at a single direction u in v-perp."""
    U, _ = _rows(u)
    return float(section_support_batch(body, v, U, tol_scale)[0])


# ---------------------------------------------------------------------------
# linear images


def rotate_body(body: ConvexBody, O) -> ConvexBody:
    """The body O K with its vertex/quadratic data transformed explicitly."""
    O = np.asarray(getattr(O, "entries", O), dtype=float)
    if body.quad_form() is not None:
        A = body.quad_form()
        return EllipsoidBody(O @ A @ O.T, label=f"rot({body.label})")
    V = body.vertex_array()
    if V is not None:
        return VertexPolytopeBody(V @ O.T, label=f"rot({body.label})")
    s = body.box_halfsides()
    if s is not None:
        if body.dim > 16:
            raise MissingOracleError("rotated box vertices too large to materialize")
        signs = np.array(list(itertools.product((1.0, -1.0), repeat=body.dim)))
        return VertexPolytopeBody((signs * s) @ O.T, label=f"rot({body.label})")
    hb = body.hull_balls()
    if hb is not None:
        bu, ru, bw, rw = hb
        return HullBallsBody(O @ bu, ru, O @ bw, rw, label=f"rot({body.label})")
    if isinstance(body, ProductBallsBody):
        return ProductBallsBody(O @ body.basis_u, body.r_u, O @ body.basis_w, body.r_w,
                                label=f"rot({body.label})")
    raise MissingOracleError(f"rotation not supported for {body.label}")


def scale_body(body: ConvexBody, t: float) -> ConvexBody:
    """The dilate t K (t > 0)."""
    if t <= 0:
        raise BodyError("scale factor must be positive")
    if isinstance(body, SignBoxBody):
        return SignBoxBody(t * body.halfsides, label=f"scale({body.label})")
    if isinstance(body, VertexPolytopeBody):
        w = None if body.axis_weights is None else t * body.axis_weights
        return VertexPolytopeBody(t * body.vertices, label=f"scale({body.label})",
                                  axis_weights=w)
    if isinstance(body, EllipsoidBody):
        return EllipsoidBody(body.A / t**2, label=f"scale({body.label})")
    if isinstance(body, LpBallBody):
        spec = FamilySpec(Family.LP_BALL, body.dim, p=body.p)
        return LpBallBody(body.p, t * body.radius, spec=spec, label=f"scale({body.label})")
    if isinstance(body, ProductBallsBody):
        return ProductBallsBody(body.basis_u, t * body.r_u, body.basis_w, t * body.r_w,
                                label=f"scale({body.label})")
    if isinstance(body, HullBallsBody):
        return HullBallsBody(body.basis_u, t * body.r_u, body.basis_w, t * body.r_w,
                             label=f"scale({body.label})")
    raise MissingOracleError(f"scaling not supported for {body.label}")
