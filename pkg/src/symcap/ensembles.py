"""Ensemble experiments over Haar rotations.

Rotation ensembles are embarrassingly parallel: the sample budget is
partitioned across worker substreams with fixed sizes, each worker owns
an independent seeded stream, and results merge in stream order, so a run
is bitwise reproducible given (seed, workers).  Family-specific kernels
vectorize the alpha evaluation over rotation blocks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .alpha import (
    DEFAULT_ALT_SEED,
    MAX_AXIS_RATIO,
    SIGN_CACHE_LIMIT,
    SpectralPurityError,
    _sign_matrix,
    bilinear_sup,
)
from .bodies import ConvexBody, FamilySpec, make_body
from .functionals import (
    EstimatorResult,
    circumradius,
    contact_point,
    inradius,
    mean_width,
    section_mean_width,
    split_counts,
)
from .rotations import (
    RngStream,
    apply_J,
    haar_rotation_matrices,
    sample_sphere,
    standard_J,
)
from .bodies import section_support_batch

__all__ = [
    "EnsembleConfig",
    "TailProfile",
    "HeuristicAlphaError",
    "alpha_ensemble",
    "expect_alpha_moment",
    "capacity_expectation_sandwich",
    "ellipsoid_capacity_samples",
    "ellipsoid_capacity_expectation",
    "mean_identity_experiment",
    "concentration_profile",
    "psi2_norm_estimate",
    "xi_pair_samples",
    "xi_pair_samples_full",
    "ball_product_growth_sweep",
    "chevet_diagnostic",
    "moment_root",
]


class HeuristicAlphaError(RuntimeError):
    """An exact alpha route was required but only the alternating lower
    bound is available; pass allow_heuristic to accept it."""


@dataclass(frozen=True)
class EnsembleConfig:
    body: FamilySpec
    n_samples: int
    seed: int
    p: float = 1.0
    workers: int = 1

    def __post_init__(self):
        if self.n_samples < 100:
            raise ValueError("need n_samples >= 100")
        if self.p == 0:
            raise ValueError("moment order p must be nonzero")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


BLOCK = 512


# ---------------------------------------------------------------------------
# vectorized alpha kernels


def _alpha_kernel(body: ConvexBody, allow_heuristic: bool):
    """Return (fn(JO_block) -> values, exact: bool) for the body's polar."""
    polar = body.polar()
    C = polar.quad_form()
    if C is not None:
        lam, Q = np.linalg.eigh(C)
        inv_half = Q @ np.diag(lam ** -0.5) @ Q.T

        def quad_kernel(JO):
            W = inv_half @ JO @ inv_half
            return np.linalg.svd(W, compute_uv=False)[:, 0]

        return quad_kernel, True
    s = polar.box_halfsides()
    if s is not None:
        if body.dim <= SIGN_CACHE_LIMIT:
            S = _sign_matrix(body.dim)

            def enum_kernel(JO):
                out = np.empty(JO.shape[0])
                for i, M in enumerate(JO):
                    Mp = s[:, None] * M * s[None, :]
                    out[i] = np.abs(S @ Mp.T).sum(axis=1).max()
                return out

            return enum_kernel, True
        if not allow_heuristic:
            raise HeuristicAlphaError(
                f"polar of {body.label} is an implicit box in dimension {body.dim}; "
                "only the sign-ascent lower bound applies")
        gen = RngStream(DEFAULT_ALT_SEED, 777).generator()
        n_starts = 8 * body.dim

        def ascent_kernel(JO):
            out = np.empty(JO.shape[0])
            for i, M in enumerate(JO):
                Mp = s[:, None] * M * s[None, :]
                X = np.where(gen.standard_normal((n_starts, body.dim)) >= 0, 1.0, -1.0)
                prev = -np.inf
                val = 0.0
                for _ in range(60):
                    Y = np.where(X @ Mp.T >= 0, 1.0, -1.0)
                    X = np.where(Y @ Mp >= 0, 1.0, -1.0)
                    val = float(np.einsum("ij,ij->i", X @ Mp.T, Y).max())
                    if val - prev <= 1e-12 * (1.0 + abs(val)):
                        break
                    prev = val
                out[i] = val
            return out

        return ascent_kernel, False
    V = polar.vertex_array()
    if V is not None:

        def vertex_kernel(JO):
            G = V @ (JO @ V.T)  # G[n, b, a] = <JO v_a, v_b>
            return np.abs(G).max(axis=(1, 2))

        return vertex_kernel, True
    hb = polar.hull_balls()
    if hb is not None:
        bu, ru, bw, rw = hb

        def hull_kernel(JO):
            JOu = JO @ bu
            s_uu = np.linalg.svd(bu.T @ JOu, compute_uv=False)[:, 0]
            s_wu = np.linalg.svd(bw.T @ JOu, compute_uv=False)[:, 0]
            s_ww = np.linalg.svd(bw.T @ (JO @ bw), compute_uv=False)[:, 0]
            return np.maximum.reduce([ru * ru * s_uu, ru * rw * s_wu, rw * rw * s_ww])

        return hull_kernel, True
    if not allow_heuristic:
        raise HeuristicAlphaError(
            f"no exact alpha route for {body.label}; only alternating maximization applies")

    def generic_kernel(JO):
        out = np.empty(JO.shape[0])
        for i, M in enumerate(JO):
            out[i] = bilinear_sup(body, M).value
        return out

    return generic_kernel, False


def _conjugated_blocks(stream: RngStream, dim: int, counts: list[int]):
    """Yield (worker_index, O_block, JO_block) in deterministic order."""
    J = standard_J(dim)
    for w, nb in enumerate(counts):
        gen = stream.child(w).generator()
        done = 0
        while done < nb:
            k = min(BLOCK, nb - done)
            Os = haar_rotation_matrices(gen, dim, k)
            JO = np.transpose(Os, (0, 2, 1)) @ (J @ Os)
            yield w, Os, JO
            done += k


def alpha_ensemble(body: ConvexBody, n: int, rng: RngStream, workers: int = 1,
                   allow_heuristic: bool = False) -> np.ndarray:
    """Samples of alpha(O K) over Haar rotations, in stream order."""
    kernel, _ = _alpha_kernel(body, allow_heuristic)
    vals = []
    for _, _, JO in _conjugated_blocks(rng, body.dim, split_counts(n, workers)):
        vals.append(kernel(JO))
    return np.concatenate(vals)


def moment_root(samples: np.ndarray, p: float, seed: int) -> EstimatorResult:
    """(mean of samples^p)^(1/p) with a delta-method standard error on the
    log-moment; samples must be strictly positive."""
    x = np.asarray(samples, dtype=float)
    y = np.exp(p * np.log(x))
    m = float(y.mean())
    sd = float(y.std(ddof=1)) if y.size > 1 else 0.0
    se_m = sd / math.sqrt(y.size)
    est = m ** (1.0 / p)
    se = est * se_m / (abs(p) * m) if m > 0 else 0.0
    return EstimatorResult(est, se, int(y.size), seed)


def bootstrap_se(samples: np.ndarray, p: float, rng: RngStream,
                 n_boot: int = 200) -> float:
    gen = rng.generator()
    x = np.asarray(samples, dtype=float)
    idx = gen.integers(0, x.size, size=(n_boot, x.size))
    roots = np.exp(np.log(np.exp(p * np.log(x))[idx].mean(axis=1)) / p)
    return float(roots.std(ddof=1))


def expect_alpha_moment(cfg: EnsembleConfig, allow_heuristic: bool = False,
                        return_samples: bool = False):
    """p-th moment root of alpha(O K) over the rotation ensemble."""
    body = make_body(cfg.body)
    samples = alpha_ensemble(body, cfg.n_samples, RngStream(cfg.seed),
                             cfg.workers, allow_heuristic)
    res = moment_root(samples, cfg.p, cfg.seed)
    if return_samples:
        return res, samples
    return res


def capacity_expectation_sandwich(cfg: EnsembleConfig, allow_heuristic: bool = False) -> dict:
    """Aggregated per-rotation capacity brackets [1/alpha, 4/alpha]; the two
    endpoints differ by the deterministic factor 4."""
    if cfg.p <= 0:
        raise ValueError("sandwich aggregation needs p > 0")
    body = make_body(cfg.body)
    samples = alpha_ensemble(body, cfg.n_samples, RngStream(cfg.seed),
                             cfg.workers, allow_heuristic)
    lo = moment_root(1.0 / samples, cfg.p, cfg.seed)
    return {"lo": lo, "hi": lo.scaled(4.0)}


# ---------------------------------------------------------------------------
# exact ellipsoid capacity ensembles


MAX_PURITY_FAILURES = 1e-3


def ellipsoid_capacity_samples(C: np.ndarray, n: int, rng: RngStream,
                               workers: int = 1) -> tuple[np.ndarray, int]:
    """Exact capacities of rotated ellipsoids {x: x^T C x <= 1}: per rotation
    the spectrum of J(O) C gives the minimal closed-characteristic action.
    Returns (samples, purity_failure_count); aborts above a 0.1% failure
    rate."""
    C = np.asarray(C, dtype=float)
    dim = C.shape[0]
    lam = np.linalg.eigvalsh(C)
    if lam[0] <= 0 or lam[-1] / lam[0] > MAX_AXIS_RATIO**2:
        raise SpectralPurityError("form not positive definite within axis-ratio guard")
    scale = float(np.linalg.norm(C, 2))
    out = np.empty(n)
    failures = 0
    i = 0
    for _, _, JO in _conjugated_blocks(rng, dim, split_counts(n, workers)):
        ev = np.linalg.eigvals(JO @ C)
        bad = np.abs(ev.real).max(axis=1) > 1e-8 * scale
        failures += int(bad.sum())
        beta = np.abs(ev.imag).max(axis=1)
        vals = math.pi / beta
        vals[bad] = np.nan
        out[i:i + vals.size] = vals
        i += vals.size
    if failures > MAX_PURITY_FAILURES * n:
        raise SpectralPurityError(
            f"{failures}/{n} rotations failed the spectral purity check")
    return out, failures


def ellipsoid_capacity_expectation(axes, p: float, n: int, rng: RngStream,
                                   workers: int = 1) -> EstimatorResult:
    axes = np.asarray(axes, dtype=float)
    C = np.diag(np.r_[math.pi / axes, math.pi / axes])
    samples, _ = ellipsoid_capacity_samples(C, n, rng, workers)
    good = samples[~np.isnan(samples)]
    return moment_root(good, p, rng.seed)


# ---------------------------------------------------------------------------
# the exact mean identity


def mean_identity_experiment(body: ConvexBody, n: int, rng: RngStream,
                             workers: int = 1, n_ref: int | None = None) -> dict:
    """Two pipelines for one number: the rotation-ensemble mean of the polar
    section width along J(O) v (v the polar contact point) against
    R(polar) times the spherical section mean width.  The expectations are
    equal; the estimates must agree within joint standard errors.
    """
    if n_ref is None:
        n_ref = max(20 * n, 100)
    cp = contact_point(body)
    v = cp.v
    v_unit = v / np.linalg.norm(v)
    polar = body.polar()
    widths = []
    for _, Os, _ in _conjugated_blocks(rng, body.dim, split_counts(n, workers)):
        Ov = Os @ v
        z = np.einsum("nji,nj->ni", Os, apply_J(Ov))  # J(O) v, lies in v-perp
        widths.append(section_support_batch(polar, v_unit, z))
    w = np.concatenate(widths)
    ens = EstimatorResult(float(w.mean()), float(w.std(ddof=1)) / math.sqrt(w.size),
                          int(w.size), rng.seed)
    R = circumradius(polar)
    ref = section_mean_width(polar, v_unit, n_ref, rng.child(1009), workers).scaled(R)
    return {"ensemble": ens, "reference": ref,
            "contact_point": [float(x) for x in v]}


# ---------------------------------------------------------------------------
# concentration profiles


@dataclass(frozen=True)
class TailProfile:
    dim: int
    n_samples: int
    thresholds: tuple[float, ...]
    empirical_tail: tuple[float, ...]
    fitted_slope: float | None
    sd: float
    mean: float
    degenerate: bool

    def to_dict(self) -> dict:
        return {"dim": self.dim, "n_samples": self.n_samples,
                "thresholds": list(self.thresholds),
                "empirical_tail": list(self.empirical_tail),
                "fitted_slope": self.fitted_slope, "sd": self.sd,
                "mean": self.mean, "degenerate": self.degenerate}


def tail_profile_from_samples(samples: np.ndarray, dim: int, n_grid: int = 25) -> TailProfile:
    x = np.asarray(samples, dtype=float)
    mean = float(x.mean())
    sd = float(x.std(ddof=1))
    dev = np.abs(x - mean)
    if sd <= 1e-14 * max(1.0, abs(mean)):
        return TailProfile(dim, x.size, (), (), None, sd, mean, True)
    ts = np.linspace(0.0, float(dev.max()), n_grid + 1)[1:]
    tail = np.array([(dev >= t).mean() for t in ts])
    keep = tail >= 20.0 / x.size
    slope = None
    if keep.sum() >= 3:
        A = np.vstack([np.ones(int(keep.sum())), ts[keep] ** 2]).T
        coef, *_ = np.linalg.lstsq(A, np.log(tail[keep]), rcond=None)
        slope = float(coef[1])
    return TailProfile(dim, x.size, tuple(map(float, ts)), tuple(map(float, tail)),
                       slope, sd, mean, False)


def concentration_profile(spec_for_dim, dims, n: int, rng: RngStream,
                          workers: int = 1, capacity_side: bool = False,
                          allow_heuristic: bool = False) -> list[TailProfile]:
    """Tail profiles of alpha(O K) (or of the capacity lower bound 1/alpha)
    across dimensions; slopes of log-tail against t^2 quantify the
    Gaussian-shaped decay."""
    profiles = []
    for k, dim in enumerate(dims):
        body = make_body(spec_for_dim(dim))
        samples = alpha_ensemble(body, n, rng.child(101 * k), workers, allow_heuristic)
        if capacity_side:
            samples = 1.0 / samples
        profiles.append(tail_profile_from_samples(samples, dim))
    return profiles


# ---------------------------------------------------------------------------
# subgaussian norm estimation


def psi2_norm_estimate(samples, p_max: int = 10) -> float:
    """Moment-based subgaussian norm: max over integer p of
    p^(-1/2) (mean |Z|^p)^(1/p).  Higher moments than p_max = 10 are too
    noisy at desk-scale sample sizes."""
    x = np.abs(np.asarray(samples, dtype=float))
    if x.size == 0:
        raise ValueError("empty sample")
    if x.size < 1000:
        raise ValueError("need at least 1000 samples")
    if p_max > 10:
        raise ValueError("p_max is capped at 10")
    best = 0.0
    for p in range(1, p_max + 1):
        best = max(best, float((x ** p).mean() ** (1.0 / p)) / math.sqrt(p))
    return best


def xi_pair_samples(rng: RngStream, dim: int, n: int, x=None, y=None) -> np.ndarray:
    """Samples of <J(O) x, y> for fixed x, y over Haar rotations.

    Only the pair (O x, O y) enters, and its law is the uniform orthonormal
    2-frame (after reducing y to its component orthogonal to x), so the
    samples come from two orthonormalized Gaussian vectors instead of full
    rotation draws.
    """
    gen = rng.generator()
    if x is None or y is None:
        scale = 1.0
    else:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        e = x / np.linalg.norm(x)
        py = y - (y @ e) * e
        scale = float(np.linalg.norm(x) * np.linalg.norm(py))
        if scale == 0.0:
            return np.zeros(n)
    g1 = gen.standard_normal((n, dim))
    g2 = gen.standard_normal((n, dim))
    e1 = g1 / np.linalg.norm(g1, axis=1)[:, None]
    f = g2 - np.einsum("ni,ni->n", g2, e1)[:, None] * e1
    f /= np.linalg.norm(f, axis=1)[:, None]
    return scale * np.einsum("ni,ni->n", f, apply_J(e1))


def xi_pair_samples_full(rng: RngStream, dim: int, n: int, x, y) -> np.ndarray:
    """Reference implementation through full Haar rotation draws."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = np.empty(n)
    i = 0
    for _, Os, _ in _conjugated_blocks(rng, dim, [n]):
        Ox = Os @ x
        Oy = Os @ y
        out[i:i + Os.shape[0]] = np.einsum("ni,ni->n", apply_J(Ox), Oy)
        i += Os.shape[0]
    return out


# ---------------------------------------------------------------------------
# ball-product growth sweep


def ball_product_growth_sweep(lambdas, dim: int, n: int, rng: RngStream,
                              workers: int = 1, anchor_samples: int = 20000) -> list[dict]:
    """Certified capacity lower-bound ensembles E[1/alpha(O K_lambda)] along a
    lambda grid, with the inradius / section-mean-width anchor per lambda.

    A common rotation ensemble is used across the grid so the growth
    comparison is monotone pathwise.
    """
    if dim < 6:
        raise ValueError("sweep needs dim >= 6")
    from .bodies import Family, make_body as _mk

    lambdas = [float(t) for t in lambdas]
    bodies = [_mk(FamilySpec(Family.BALL_PRODUCT, dim, radius=1.0, lam=lam))
              for lam in lambdas]
    kernels = [_alpha_kernel(b, allow_heuristic=False)[0] for b in bodies]
    samples = [[] for _ in lambdas]
    for _, _, JO in _conjugated_blocks(rng, dim, split_counts(n, workers)):
        for i, kern in enumerate(kernels):
            samples[i].append(1.0 / kern(JO))
    out = []
    for i, lam in enumerate(lambdas):
        vals = np.concatenate(samples[i])
        est = EstimatorResult(float(vals.mean()),
                              float(vals.std(ddof=1)) / math.sqrt(vals.size),
                              int(vals.size), rng.seed)
        body = bodies[i]
        cp = contact_point(body)
        v_unit = cp.v / np.linalg.norm(cp.v)
        msec = section_mean_width(body.polar(), v_unit, anchor_samples,
                                  rng.child(5000 + i), workers)
        r = inradius(body)
        out.append({"lam": lam, "capacity_lower_bound": est,
                    "inradius": r,
                    "section_mean_width": msec,
                    "anchor_ratio": r / msec.estimate})
    return out


# ---------------------------------------------------------------------------
# Gaussian comparison diagnostic


def chevet_diagnostic(body: ConvexBody, n: int, rng: RngStream) -> dict:
    """Empirical mean of the Gaussian operator norm between the polar gauge
    and the body gauge against its mean-width upper bound; a diagnostic
    ratio, not an acceptance quantity."""
    gen = rng.generator()
    dim = body.dim
    vals = np.empty(n)
    for i in range(n):
        G = gen.standard_normal((dim, dim))
        vals[i] = bilinear_sup(body, G).value
    polar = body.polar()
    R = circumradius(polar)
    m_polar = mean_width(polar, max(20000, 100), rng.child(1))
    bound = math.sqrt(dim) * 2.0 * R * m_polar.estimate
    est = EstimatorResult(float(vals.mean()), float(vals.std(ddof=1)) / math.sqrt(n),
                          n, rng.seed)
    return {"gaussian_norm": est, "bound": bound,
            "ratio": est.estimate / bound,
            "polar_mean_width": m_polar}
