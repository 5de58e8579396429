"""The operator norm alpha(K) = ||J||_{K-polar -> K} and the capacity
sandwich built on it.

alpha(K) is the supremum of <J x, y> over pairs x, y in the polar body.
Exact routes: a vertex-pair scan when the polar has an explicit vertex
list, sign-vector enumeration for implicit boxes up to dimension 20, the
top singular value of C^{-1/2} J C^{-1/2} for quadratic polars with form
C, and a block decomposition for hulls of two orthogonal balls.  The
fallback is alternating maximization through support-point oracles; that
route is a certified lower bound only and is flagged as such.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from .bodies import ConvexBody, MissingOracleError
from .functionals import circumradius
from .rotations import RngStream, _as_generator, standard_J

__all__ = [
    "AlphaMethod",
    "AlphaResult",
    "CapacityInterval",
    "SpectralPurityError",
    "alpha",
    "bilinear_sup",
    "ehz_sandwich",
    "ehz_ellipsoid",
    "ehz_from_conjugated_form",
    "lipschitz_gap",
]


class AlphaMethod(str, Enum):
    VERTEX_EXACT = "VertexExact"
    SPECTRAL = "Spectral"
    ALTERNATING_LOWER_BOUND = "AlternatingLowerBound"


class SpectralPurityError(RuntimeError):
    """Eigenvalues of the characteristic flow failed the purity check."""


@dataclass(frozen=True)
class AlphaResult:
    value: float
    method: AlphaMethod
    certificate: tuple[np.ndarray, np.ndarray] | None = None
    gap_bound: float | None = None  # 0.0 for exact methods, None for lower bounds
    route: str = ""
    converged: bool = True

    @property
    def certified(self) -> bool:
        return self.gap_bound == 0.0

    def to_dict(self) -> dict:
        d = {"value": self.value, "method": self.method.value, "route": self.route,
             "certified": self.certified}
        if self.certificate is not None:
            d["certificate"] = [list(map(float, self.certificate[0])),
                                list(map(float, self.certificate[1]))]
        return d


def _operator(body: ConvexBody, rotation) -> np.ndarray:
    J = standard_J(body.dim)
    if rotation is None:
        return J
    O = np.asarray(getattr(rotation, "entries", rotation), dtype=float)
    return O.T @ J @ O


@lru_cache(maxsize=8)
def _sign_matrix(dim: int) -> np.ndarray:
    # first coordinate fixed to +1; antipodal pairs are redundant
    signs = np.array(list(itertools.product((1.0, -1.0), repeat=dim - 1)))
    return np.hstack([np.ones((signs.shape[0], 1)), signs])


SIGN_ENUM_LIMIT = 20
SIGN_CACHE_LIMIT = 16


def _sign_blocks(dim: int):
    if dim <= SIGN_CACHE_LIMIT:
        yield _sign_matrix(dim)
        return
    head = _sign_matrix(SIGN_CACHE_LIMIT)
    for tail in itertools.product((1.0, -1.0), repeat=dim - SIGN_CACHE_LIMIT):
        t = np.tile(np.asarray(tail), (head.shape[0], 1))
        yield np.hstack([head, t])


def bilinear_sup_vertices(M: np.ndarray, V: np.ndarray):
    G = (V @ M.T) @ V.T
    i, j = np.unravel_index(np.argmax(np.abs(G)), G.shape)
    val = G[i, j]
    x, y = V[i].copy(), V[j].copy()
    if val < 0:
        y = -y
    return float(abs(val)), (x, y)


def bilinear_sup_signbox(M: np.ndarray, halfsides: np.ndarray):
    Ms = (halfsides[:, None] * M * halfsides[None, :]).T  # row i = M' e_i pattern
    best, bx = -np.inf, None
    for S in _sign_blocks(M.shape[0]):
        vals = np.abs(S @ Ms).sum(axis=1)
        k = int(np.argmax(vals))
        if vals[k] > best:
            best, bx = float(vals[k]), S[k]
    x = bx * halfsides
    y = np.where(M @ x >= 0, 1.0, -1.0) * halfsides
    return best, (x, y)


def bilinear_sup_quadratic(M: np.ndarray, C: np.ndarray):
    lam, Q = np.linalg.eigh(C)
    inv_half = Q @ np.diag(lam ** -0.5) @ Q.T
    W = inv_half @ M @ inv_half
    U, s, Vt = np.linalg.svd(W)
    x = inv_half @ Vt[0]
    y = inv_half @ U[:, 0]
    return float(s[0]), (x, y)


def bilinear_sup_hull_balls(M: np.ndarray, basis_u: np.ndarray, r_u: float,
                            basis_w: np.ndarray, r_w: float):
    """sup over the hull of two orthogonal balls: the bilinear supremum over
    a convex hull is the max over the pieces, and each piece pair is a
    top singular value of a block of M."""
    pieces = []
    for (bx, rx) in ((basis_u, r_u), (basis_w, r_w)):
        for (by, ry) in ((basis_u, r_u), (basis_w, r_w)):
            B = by.T @ M @ bx
            U, s, Vt = np.linalg.svd(B)
            val = rx * ry * s[0]
            x = rx * bx @ Vt[0]
            y = ry * by @ U[:, 0]
            pieces.append((float(val), (x, y)))
    return max(pieces, key=lambda p: p[0])


def alternating_bilinear_sup(M: np.ndarray, polar: ConvexBody, rng,
                             n_starts: int, tol: float = 1e-10,
                             max_iters: int = 500):
    """Multi-start alternating maximization of <M x, y> over the polar
    body squared; monotone, returns the best stationary value found."""
    gen = _as_generator(rng)
    dirs = gen.standard_normal((n_starts, polar.dim))
    X = polar.support_point_batch(dirs)
    best_val = -np.inf
    best_pair = None
    converged = False
    prev = -np.inf
    for _ in range(max_iters):
        Y = polar.support_point_batch(X @ M.T)
        X = polar.support_point_batch(Y @ M)
        vals = np.einsum("ij,ij->i", X @ M.T, Y)
        k = int(np.argmax(vals))
        if vals[k] > best_val:
            best_val = float(vals[k])
            best_pair = (X[k].copy(), Y[k].copy())
        if best_val - prev < tol * (1.0 + abs(best_val)):
            converged = True
            break
        prev = best_val
    return best_val, best_pair, converged


DEFAULT_ALT_SEED = 20770


def bilinear_sup(body: ConvexBody, M: np.ndarray, rng=None,
                 n_starts: int | None = None) -> AlphaResult:
    """sup_{x, y in polar(body)} <M x, y> for an arbitrary matrix M,
    dispatched on the structure of the polar body."""
    polar = body.polar()
    C = polar.quad_form()
    if C is not None:
        val, cert = bilinear_sup_quadratic(M, C)
        return AlphaResult(val, AlphaMethod.SPECTRAL, cert, 0.0, route="quadratic")
    V = polar.vertex_array()
    if V is not None and polar.box_halfsides() is None:
        val, cert = bilinear_sup_vertices(M, V)
        return AlphaResult(val, AlphaMethod.VERTEX_EXACT, cert, 0.0, route="vertex-pairs")
    s = polar.box_halfsides()
    if s is not None and body.dim <= SIGN_ENUM_LIMIT:
        val, cert = bilinear_sup_signbox(M, s)
        return AlphaResult(val, AlphaMethod.VERTEX_EXACT, cert, 0.0,
                           route="sign-enumeration")
    hb = polar.hull_balls()
    if hb is not None:
        val, cert = bilinear_sup_hull_balls(M, *hb)
        return AlphaResult(val, AlphaMethod.SPECTRAL, cert, 0.0, route="ball-hull-blocks")
    if rng is None:
        rng = RngStream(DEFAULT_ALT_SEED)
    if n_starts is None:
        n_starts = 8 * body.dim
    try:
        val, cert, ok = alternating_bilinear_sup(M, polar, rng, n_starts)
    except (NotImplementedError, MissingOracleError) as exc:
        raise MissingOracleError(
            f"no bilinear maximization route for polar of {body.label}") from exc
    return AlphaResult(val, AlphaMethod.ALTERNATING_LOWER_BOUND, cert, None,
                       route="alternating", converged=ok)


def alpha(body: ConvexBody, rotation=None, rng=None,
          n_starts: int | None = None) -> AlphaResult:
    """alpha of the (optionally rotated) body: the largest symplectic pairing
    of two polar points, equal to the J-operator norm from the polar gauge
    to the body gauge."""
    if body.dim % 2 != 0:
        raise MissingOracleError("alpha needs an even-dimensional body")
    return bilinear_sup(body, _operator(body, rotation), rng=rng, n_starts=n_starts)


@dataclass(frozen=True)
class CapacityInterval:
    lo: float
    hi: float
    certified: bool
    alpha_result: AlphaResult

    def to_dict(self) -> dict:
        return {"lo": self.lo, "hi": self.hi, "certified": self.certified,
                "alpha": self.alpha_result.to_dict()}


def ehz_sandwich(body: ConvexBody, rotation=None, rng=None) -> CapacityInterval:
    """[1/alpha, 4/alpha]: a two-sided capacity bracket.

    The interval is certified only when alpha came from an exact method; a
    lower-bound alpha would silently invalidate the upper endpoint, so the
    result carries an explicit flag instead.
    """
    res = alpha(body, rotation, rng=rng)
    return CapacityInterval(1.0 / res.value, 4.0 / res.value, res.certified, res)


MAX_AXIS_RATIO = 1e8


def ehz_from_conjugated_form(JC: np.ndarray, scale: float) -> float:
    """Capacity from the (already conjugated) characteristic flow matrix:
    eigenvalues come in pairs +-i b_j and the capacity is pi / max b_j."""
    ev = np.linalg.eigvals(JC)
    if np.abs(ev.real).max() > 1e-8 * max(scale, 1e-300):
        raise SpectralPurityError(
            f"characteristic spectrum has real part {np.abs(ev.real).max():.3e}")
    beta = np.abs(ev.imag).max()
    return math.pi / beta


def ehz_ellipsoid(C: np.ndarray) -> float:
    """Capacity of the ellipsoid {x : x^T C x <= 1}: the minimal action of a
    closed characteristic on the boundary, which the linear flow makes a
    pure eigenvalue computation."""
    C = np.asarray(C, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1] or C.shape[0] % 2 != 0:
        raise ValueError("C must be square with even dimension")
    if np.abs(C - C.T).max() > 1e-10 * max(1.0, np.abs(C).max()):
        raise ValueError("C must be symmetric")
    lam = np.linalg.eigvalsh(C)
    if lam[0] <= 0:
        raise ValueError("C must be positive definite")
    if lam[-1] / lam[0] > MAX_AXIS_RATIO**2:
        raise SpectralPurityError("axis ratio beyond 1e8; spectrum unreliable")
    J = standard_J(C.shape[0])
    return ehz_from_conjugated_form(J @ C, float(np.linalg.norm(C, 2)))


def lipschitz_gap(body: ConvexBody, O1, O2) -> dict:
    """Both sides of the rotation stability estimate: the alpha difference
    against twice the squared polar circumradius times the Hilbert-Schmidt
    distance of the rotations."""
    a1 = alpha(body, O1)
    a2 = alpha(body, O2)
    if not (a1.certified and a2.certified):
        raise MissingOracleError("lipschitz gap needs an exact alpha route")
    R = circumradius(body.polar())
    m1 = np.asarray(getattr(O1, "entries", O1), dtype=float)
    m2 = np.asarray(getattr(O2, "entries", O2), dtype=float)
    rhs = 2.0 * R * R * float(np.linalg.norm(m1 - m2))
    return {"lhs": a1.value - a2.value, "rhs": rhs}
