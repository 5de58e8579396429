"""Haar-distributed rotations, the standard complex structure, and
distributional tests for conjugation pushforwards.

Sampling follows the Gaussian + QR construction with the R-diagonal sign
correction (without which QR output is not Haar), then a final-column
negation to land in the special orthogonal group.  All randomness flows
through explicit seeded streams; there is no global RNG.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special
from scipy import stats

__all__ = [
    "RngStream",
    "RotationMatrix",
    "RotationError",
    "PushforwardIdentityError",
    "standard_J",
    "apply_J",
    "haar_rotation",
    "haar_rotation_matrices",
    "conjugate",
    "conjugated_J",
    "pushforward_identities",
    "sphere_coordinate_cdf",
    "pushforward_uniformity_test",
    "sample_sphere",
    "ks_uniformity",
]


class RotationError(RuntimeError):
    """Certification failure during rotation construction."""


class PushforwardIdentityError(RuntimeError):
    """A per-sample algebraic identity failed (not a statistical rejection)."""


@dataclass(frozen=True)
class RngStream:
    """Reproducible substream: same (seed, stream_id) gives the identical
    sequence everywhere; distinct stream_ids are independent."""

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.Philox(ss))

    def child(self, k: int) -> "RngStream":
        return RngStream(self.seed, self.stream_id + int(k))


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError("rng must be an RngStream or numpy Generator")


@dataclass(frozen=True)
class RotationMatrix:
    """Element of SO(dim); orthogonality and det sign are certified at
    construction, not recomputed at use sites."""

    dim: int
    entries: np.ndarray

    @property
    def T(self) -> np.ndarray:
        return self.entries.T


ORTHO_TOL = 1e-12


def standard_J(dim: int) -> np.ndarray:
    """The complex-structure matrix J(x, y) = (-y, x) in the
    (x_1..x_n, y_1..y_n) coordinate ordering."""
    if dim % 2 != 0 or dim < 2:
        raise RotationError(f"dim must be even and >= 2, got {dim}")
    n = dim // 2
    J = np.zeros((dim, dim))
    J[:n, n:] = -np.eye(n)
    J[n:, :n] = np.eye(n)
    return J


def apply_J(X: np.ndarray) -> np.ndarray:
    """J applied to rows of X without materializing the matrix."""
    X = np.asarray(X, dtype=float)
    n = X.shape[-1] // 2
    return np.concatenate([-X[..., n:], X[..., :n]], axis=-1)


def haar_rotation_matrices(rng, dim: int, n: int) -> np.ndarray:
    """n Haar samples from SO(dim), stacked as (n, dim, dim).

    Gaussian degeneracy has probability zero; a draw that fails the
    orthogonality certificate is resampled.
    """
    if dim < 2:
        raise RotationError("dim must be >= 2")
    gen = _as_generator(rng)
    out = np.empty((n, dim, dim))
    todo = n
    filled = 0
    while todo > 0:
        g = gen.standard_normal((todo, dim, dim))
        q, r = np.linalg.qr(g)
        d = np.sign(np.diagonal(r, axis1=1, axis2=2))
        d[d == 0] = 1.0
        q = q * d[:, None, :]
        det = np.linalg.det(q)
        q[det < 0, :, -1] *= -1.0
        eye = np.eye(dim)
        err = np.abs(np.einsum("nij,nik->njk", q, q) - eye).max(axis=(1, 2))
        good = err <= ORTHO_TOL
        k = int(good.sum())
        out[filled:filled + k] = q[good]
        filled += k
        todo -= k
    return out


def haar_rotation(rng, dim: int) -> RotationMatrix:
    """One Haar-distributed element of SO(dim)."""
    q = haar_rotation_matrices(rng, dim, 1)[0]
    return RotationMatrix(dim, q)


def _entries(O) -> np.ndarray:
    return np.asarray(getattr(O, "entries", O), dtype=float)


def conjugate(A: np.ndarray, O) -> np.ndarray:
    """O^T A O."""
    Om = _entries(O)
    A = np.asarray(A, dtype=float)
    if A.shape != Om.shape:
        raise RotationError(f"shape mismatch {A.shape} vs {Om.shape}")
    return Om.T @ A @ Om


def conjugated_J(O) -> np.ndarray:
    Om = _entries(O)
    return conjugate(standard_J(Om.shape[0]), Om)


def pushforward_identities(A: np.ndarray, y: np.ndarray, O) -> dict:
    """Observed vs predicted cylindrical coordinates of z = O^T A O y.

    With v = O y:  <z, y> = <A v, v>  and  |z - <z,y> y| equals
    sqrt(|Av|^2 - <Av,v>^2).  These are algebraic identities holding per
    sample for any matrix A and unit y.
    """
    y = np.asarray(y, dtype=float)
    if abs(np.linalg.norm(y) - 1.0) > 1e-9:
        raise RotationError("y must be a unit vector")
    Om = _entries(O)
    A = np.asarray(A, dtype=float)
    z = Om.T @ (A @ (Om @ y))
    v = Om @ y
    t_obs = float(z @ y)
    r_obs = float(np.linalg.norm(z - t_obs * y))
    Av = A @ v
    t_pred = float(Av @ v)
    r_pred = float(math.sqrt(max(float(Av @ Av) - t_pred**2, 0.0)))
    return {"t_obs": t_obs, "r_obs": r_obs, "t_pred": t_pred, "r_pred": r_pred}


def sphere_coordinate_cdf(m: int, s) -> np.ndarray | float:
    """CDF of one coordinate of the uniform distribution on S^{m-1}.

    The density is proportional to (1 - s^2)^{(m-3)/2}; the normalized
    integral is expressed through the regularized incomplete beta
    function.  m = 3 reduces to the uniform law (1 + s)/2, and m = 2 to
    the arcsine law 1 - arccos(s)/pi.
    """
    if m < 2:
        raise RotationError("m must be >= 2")
    s_arr = np.asarray(s, dtype=float)
    if np.any(np.abs(s_arr) > 1.0 + 1e-12):
        raise RotationError("coordinate must lie in [-1, 1]")
    s_arr = np.clip(s_arr, -1.0, 1.0)
    ib = special.betainc(0.5, (m - 1) / 2.0, s_arr**2)
    out = 0.5 * (1.0 + np.sign(s_arr) * ib)
    if np.isscalar(s) or np.ndim(s) == 0:
        return float(out)
    return out


def sample_sphere(rng, dim: int, n: int) -> np.ndarray:
    """n uniform points on S^{dim-1} (normalized Gaussians), rows."""
    gen = _as_generator(rng)
    g = gen.standard_normal((n, dim))
    norms = np.linalg.norm(g, axis=1)
    while np.any(norms == 0):  # probability zero
        bad = norms == 0
        g[bad] = gen.standard_normal((int(bad.sum()), dim))
        norms = np.linalg.norm(g, axis=1)
    return g / norms[:, None]


def ks_uniformity(values: np.ndarray, cdf) -> tuple[float, float]:
    """One-sample KS statistic and asymptotic p-value of values against a
    continuous CDF (asymptotic Kolmogorov distribution; use n >= 100)."""
    values = np.asarray(values, dtype=float)
    if values.size < 100:
        raise RotationError("KS test needs at least 100 samples")
    res = stats.kstest(values, cdf, mode="asymp")
    return float(res.statistic), float(res.pvalue)


def check_pushforward_support(z: np.ndarray, y: np.ndarray, tol: float = 1e-10) -> None:
    """Hard per-sample check that z lies on the unit sphere of y-perp."""
    z = np.atleast_2d(np.asarray(z, dtype=float))
    inner = np.abs(z @ y)
    radial = np.abs(np.linalg.norm(z, axis=1) - 1.0)
    if inner.max() > tol or radial.max() > tol:
        raise PushforwardIdentityError(
            f"pushforward sample off S^(d-2): max |<z,y>| = {inner.max():.3e}, "
            f"max ||z|-1| = {radial.max():.3e}")


def pushforward_uniformity_test(rng, dim: int, y: np.ndarray, n: int) -> dict:
    """KS test of the law of O^T J O y against the coordinate law of the
    sphere in y-perp.

    Each sample is first certified to satisfy the support identities
    <z, y> = 0 and |z| = 1 (a failure is a hard error, distinguished from
    a statistical rejection); the projection onto a fixed unit w in
    y-perp is then compared with the single-coordinate CDF in dimension
    m = dim - 1.
    """
    if dim % 2 != 0 or dim < 4:
        raise RotationError("dim must be even and >= 4")
    if n < 100:
        raise RotationError("need n >= 100 samples")
    y = np.asarray(y, dtype=float)
    y = y / np.linalg.norm(y)
    j = int(np.argmin(np.abs(y)))
    w = np.eye(dim)[j] - y[j] * y
    w = w / np.linalg.norm(w)
    Os = haar_rotation_matrices(rng, dim, n)
    Jy = apply_J(Os @ y)
    z = np.einsum("nji,nj->ni", Os, Jy)  # O^T (J (O y))
    check_pushforward_support(z, y)
    coords = z @ w
    stat, pval = ks_uniformity(coords, lambda s: sphere_coordinate_cdf(dim - 1, s))
    return {"ks_statistic": stat, "p_value": pval, "n": n, "dim": dim}
