"""Exact and Monte Carlo geometric functionals.

Circumradius and inradius are served only through exact routes (vertex
lists, quadratic forms, family closed forms): they enter certified
bounds, so there is no heuristic fallback.  Mean widths are plain Monte
Carlo with reported standard errors; product quadrature is hopeless in
the dimensions of interest.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .bodies import (
    ConvexBody,
    EllipsoidBody,
    Family,
    FamilySpec,
    HullBallsBody,
    MissingOracleError,
    ProductBallsBody,
    SignBoxBody,
    VertexPolytopeBody,
    section_support_batch,
)
from .rotations import RngStream, sample_sphere

__all__ = [
    "EstimatorResult",
    "ContactPoint",
    "ContactSource",
    "circumradius",
    "inradius",
    "contact_point",
    "mean_width",
    "section_mean_width",
    "volume_radius_sq",
    "nondeg_functional",
    "scaling_summary_row",
    "TABLE_FAMILIES",
    "split_counts",
    "merge_mean_var",
]


@dataclass(frozen=True)
class EstimatorResult:
    """Monte Carlo point estimate with its standard error."""

    estimate: float
    std_error: float
    n_samples: int
    seed: int
    confidence: float = 0.95

    def scaled(self, c: float) -> "EstimatorResult":
        return EstimatorResult(c * self.estimate, abs(c) * self.std_error,
                               self.n_samples, self.seed, self.confidence)

    def to_dict(self) -> dict:
        return {"estimate": self.estimate, "std_error": self.std_error,
                "n_samples": self.n_samples, "seed": self.seed,
                "confidence": self.confidence}


class ContactSource(str, Enum):
    VERTEX_SCAN = "VertexScan"
    PRINCIPAL_AXIS = "PrincipalAxis"
    CLOSED_FORM = "ClosedForm"


@dataclass(frozen=True)
class ContactPoint:
    """Contact point of the polar body with its minimal circumscribed ball."""

    v: np.ndarray
    source: ContactSource


# ---------------------------------------------------------------------------
# exact radii


def circumradius(body: ConvexBody) -> float:
    """max |x| over the body; exact routes only."""
    r = body.circumradius_exact()
    if r is None:
        raise MissingOracleError(
            f"no exact circumradius for {body.label}; use a closed-form family")
    return r


def inradius(body: ConvexBody) -> float:
    """For symmetric bodies r(K) = 1 / R(polar K)."""
    return 1.0 / circumradius(body.polar())


def _canonical_sign(v: np.ndarray) -> np.ndarray:
    for x in v:
        if abs(x) > 1e-14:
            return v if x > 0 else -v
    return v


def contact_point(body: ConvexBody) -> ContactPoint:
    """A point of the polar body attaining its circumradius.

    Ties among enumerated maximizers break toward the smallest coordinate
    index with positive sign; for the implicit cube vertex set the
    all-positive vertex is the canonical representative.
    """
    polar = body.polar()
    R = circumradius(polar)
    tol = 1e-9 * (1.0 + R)
    if isinstance(polar, VertexPolytopeBody):
        V = polar.vertices
        norms = np.linalg.norm(V, axis=1)
        idx = np.where(norms >= norms.max() - tol)[0]
        # among tied vertices prefer positive, lowest-index support
        best = min(idx, key=lambda i: _vertex_order_key(V[i]))
        return ContactPoint(_canonical_sign(V[best].copy()), ContactSource.VERTEX_SCAN)
    if isinstance(polar, SignBoxBody):
        return ContactPoint(polar.halfsides.copy(), ContactSource.VERTEX_SCAN)
    if isinstance(polar, EllipsoidBody):
        lam, vecs = polar.eigvals, polar.eigvecs
        if np.abs(polar.A - np.diag(np.diag(polar.A))).max() <= 1e-13 * np.abs(polar.A).max():
            diag = np.diag(polar.A)
            j = int(np.argmin(diag))  # first smallest: lowest index wins ties
            v = np.zeros(polar.dim)
            v[j] = 1.0 / math.sqrt(diag[j])
            return ContactPoint(v, ContactSource.PRINCIPAL_AXIS)
        v = _canonical_sign(vecs[:, 0].copy()) / math.sqrt(lam[0])
        return ContactPoint(v, ContactSource.PRINCIPAL_AXIS)
    if isinstance(polar, HullBallsBody):
        cand = [polar.r_u * polar.basis_u[:, 0], polar.r_w * polar.basis_w[:, 0]]
        norms = [np.linalg.norm(c) for c in cand]
        pick = 0 if norms[0] >= norms[1] - tol else 1
        return ContactPoint(_canonical_sign(cand[pick]), ContactSource.CLOSED_FORM)
    if isinstance(polar, ProductBallsBody):
        v = polar.r_u * polar.basis_u[:, 0] + polar.r_w * polar.basis_w[:, 0]
        return ContactPoint(_canonical_sign(v), ContactSource.CLOSED_FORM)
    raise MissingOracleError(f"no contact-point route for polar of {body.label}")


def _vertex_order_key(v: np.ndarray):
    nz = np.nonzero(np.abs(v) > 1e-14)[0]
    first = int(nz[0]) if nz.size else 0
    return (first, 0.0 if (nz.size and v[nz[0]] > 0) else 1.0, tuple(-v))


# ---------------------------------------------------------------------------
# Monte Carlo widths


def split_counts(n: int, workers: int) -> list[int]:
    base, rem = divmod(n, workers)
    return [base + (1 if i < rem else 0) for i in range(workers)]


def merge_mean_var(parts: list[tuple[int, float, float]]) -> tuple[int, float, float]:
    """Fold (count, mean, M2) accumulators in the given fixed order."""
    n, mean, m2 = 0, 0.0, 0.0
    for nb, mb, m2b in parts:
        if nb == 0:
            continue
        delta = mb - mean
        tot = n + nb
        mean += delta * nb / tot
        m2 += m2b + delta * delta * n * nb / tot
        n = tot
    return n, mean, m2


def _chunk_stats(vals: np.ndarray) -> tuple[int, float, float]:
    n = vals.size
    mean = float(vals.mean()) if n else 0.0
    m2 = float(((vals - mean) ** 2).sum()) if n else 0.0
    return n, mean, m2


def _finish(n: int, mean: float, m2: float, seed: int) -> EstimatorResult:
    sd = math.sqrt(m2 / (n - 1)) if n > 1 else 0.0
    return EstimatorResult(mean, sd / math.sqrt(n), n, seed)


def mean_width(body: ConvexBody, n: int, rng: RngStream, workers: int = 1) -> EstimatorResult:
    """Average of the support function over the uniform sphere measure."""
    if n < 100:
        raise ValueError("need n >= 100 samples")
    parts = []
    for w, nb in enumerate(split_counts(n, workers)):
        theta = sample_sphere(rng.child(w), body.dim, nb)
        parts.append(_chunk_stats(body.support_batch(theta)))
    return _finish(*merge_mean_var(parts), seed=rng.seed)


def _sphere_in_hyperplane(rng, dim: int, v: np.ndarray, n: int) -> np.ndarray:
    g = sample_sphere(rng, dim, n)
    g = g - np.outer(g @ v, v)
    norms = np.linalg.norm(g, axis=1)
    keep = norms > 1e-12
    g = g[keep] / norms[keep, None]
    return g


def section_mean_width(body_polar: ConvexBody, v, n: int, rng: RngStream,
                       workers: int = 1) -> EstimatorResult:
    """Mean width of (body n v-perp) under the uniform measure of the
    (dim-2)-sphere inside the hyperplane."""
    if n < 100:
        raise ValueError("need n >= 100 samples")
    v = np.asarray(v, dtype=float)
    v = v / np.linalg.norm(v)
    parts = []
    for w, nb in enumerate(split_counts(n, workers)):
        U = _sphere_in_hyperplane(rng.child(w).generator(), body_polar.dim, v, nb)
        vals = section_support_batch(body_polar, v, U)
        parts.append(_chunk_stats(vals))
    return _finish(*merge_mean_var(parts), seed=rng.seed)


# ---------------------------------------------------------------------------
# volume radius and non-degeneracy


def _ball_volume(m: int) -> float:
    return math.pi ** (m / 2.0) / math.gamma(m / 2.0 + 1.0)


def volume_radius_sq(spec: FamilySpec) -> float:
    """(Vol K / Vol B^{2n})^(1/n): the square of the volume radius."""
    m = spec.dim
    n = m // 2
    vb = _ball_volume(m)
    if spec.kind is Family.CUBE:
        vol = 2.0 ** m
    elif spec.kind is Family.CROSS_POLYTOPE:
        vol = 2.0 ** m / math.factorial(m)
    elif spec.kind is Family.EUCLIDEAN_BALL:
        vol = vb * spec.radius ** m
    elif spec.kind is Family.SYMPLECTIC_ELLIPSOID:
        vol = vb * float(np.prod(np.asarray(spec.axes) / math.pi))
    elif spec.kind is Family.SYMPLECTIC_BOX:
        vol = float(np.prod(spec.axes))
    else:
        raise MissingOracleError(f"no closed-form volume for {spec.kind}")
    return (vol / vb) ** (1.0 / n)


def nondeg_functional(body: ConvexBody, q: float, n: int, rng: RngStream,
                      workers: int = 1) -> EstimatorResult:
    """Ratio of the mean width to the negative-q power mean of the support
    function; the body is (C, q)-non-degenerate iff this is <= C.

    Both integrals are evaluated on a shared sample set, which reduces the
    variance of the ratio compared with independent sampling.
    """
    if q <= 0:
        raise ValueError("q must be positive")
    if n < 100:
        raise ValueError("need n >= 100 samples")
    h_parts = []
    g_parts = []
    cov_acc = []
    for w, nb in enumerate(split_counts(n, workers)):
        theta = sample_sphere(rng.child(w), body.dim, nb)
        h = body.support_batch(theta)
        if np.any(h <= 0):
            raise ValueError("support function vanished on the sphere")
        g = h ** (-q)
        h_parts.append(_chunk_stats(h))
        g_parts.append(_chunk_stats(g))
        cov_acc.append((nb, float(h.mean()), float(g.mean()),
                        float(((h - h.mean()) * (g - g.mean())).sum())))
    nh, mh, m2h = merge_mean_var(h_parts)
    ng, mg, m2g = merge_mean_var(g_parts)
    cov = _merge_cov(cov_acc)
    nd = mh * mg ** (1.0 / q)
    # delta method on ND = A * B^(1/q) with shared-sample covariance
    var_h = m2h / (nh - 1) if nh > 1 else 0.0
    var_g = m2g / (ng - 1) if ng > 1 else 0.0
    da = mg ** (1.0 / q)
    db = mh * (1.0 / q) * mg ** (1.0 / q - 1.0)
    var = (da * da * var_h + db * db * var_g + 2 * da * db * cov) / nh
    return EstimatorResult(float(nd), math.sqrt(max(var, 0.0)), nh, rng.seed)


def _merge_cov(parts) -> float:
    n, mh, mg, c = 0, 0.0, 0.0, 0.0
    for nb, mhb, mgb, cb in parts:
        if nb == 0:
            continue
        tot = n + nb
        dh, dg = mhb - mh, mgb - mg
        c += cb + dh * dg * n * nb / tot
        mh += dh * nb / tot
        mg += dg * nb / tot
        n = tot
    return c / (n - 1) if n > 1 else 0.0


# ---------------------------------------------------------------------------
# scaling summary (inradius^2, ratio, volume radius^2) per family


TABLE_FAMILIES = (Family.CUBE, Family.CROSS_POLYTOPE, Family.SYMPLECTIC_ELLIPSOID,
                  Family.SYMPLECTIC_BOX)


def _trend_reference(spec: FamilySpec) -> dict:
    """Reference growth rates f(n) per quantity, defined up to universal
    constants; used only to normalize trend plots."""
    n = spec.dim // 2
    if spec.kind is Family.CUBE:
        return {"r_sq": 1.0, "ratio": math.sqrt(n / math.log(max(n, 2))), "volradius_sq": float(n)}
    if spec.kind is Family.CROSS_POLYTOPE:
        return {"r_sq": 1.0 / n, "ratio": 1.0 / n, "volradius_sq": 1.0 / n}
    a = np.asarray(spec.axes, dtype=float)
    if spec.kind is Family.SYMPLECTIC_ELLIPSOID:
        ratio = math.sqrt(a[0]) * math.sqrt(n / float((1.0 / a).sum()))
        return {"r_sq": float(a[0]), "ratio": ratio,
                "volradius_sq": float(np.prod(a) ** (1.0 / n))}
    if spec.kind is Family.SYMPLECTIC_BOX:
        ks = np.arange(1, n + 1)
        ratio = math.sqrt(a[0]) * float(np.sqrt(n * a / np.maximum(np.log(ks), 1.0)).min())
        return {"r_sq": float(a[0]),
                "ratio": ratio,
                "volradius_sq": n * float(np.prod(a) ** (1.0 / n))}
    raise MissingOracleError(f"no trend reference for {spec.kind}")


def scaling_summary_row(spec: FamilySpec, n_samples: int, rng: RngStream,
                        workers: int = 1) -> dict:
    """One row of the scaling summary: exact inradius squared, the Monte
    Carlo ratio r / M*(polar section), and the closed-form volume-radius
    squared, each alongside its trend-normalized value."""
    if spec.kind not in TABLE_FAMILIES:
        raise MissingOracleError(f"{spec.kind} is not a summary family")
    body = make_body_cached(spec)
    r = inradius(body)
    cp = contact_point(body)
    v_unit = cp.v / np.linalg.norm(cp.v)
    msec = section_mean_width(body.polar(), v_unit, n_samples, rng, workers)
    ratio = r / msec.estimate
    ratio_se = r * msec.std_error / msec.estimate**2
    ref = _trend_reference(spec)
    row = {
        "family": spec.kind.value,
        "dim": spec.dim,
        "r_sq": r * r,
        "ratio": ratio,
        "ratio_std_error": ratio_se,
        "volradius_sq": volume_radius_sq(spec),
        "contact_point": [float(x) for x in cp.v],
        "contact_source": cp.source.value,
        "section_mean_width": msec.to_dict(),
    }
    row["normalized"] = {k: row[k] / ref[k] for k in ("r_sq", "ratio", "volradius_sq")}
    return row


_body_cache: dict = {}


def make_body_cached(spec: FamilySpec) -> ConvexBody:
    from .bodies import make_body

    key = (spec.kind, spec.dim, spec.p, spec.radius, spec.lam, spec.axes)
    if spec.vertices is not None or spec.matrix is not None:
        return make_body(spec)
    if key not in _body_cache:
        _body_cache[key] = make_body(spec)
    return _body_cache[key]
