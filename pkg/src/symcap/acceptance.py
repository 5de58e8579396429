"""Registered acceptance suites with their budgets.

Each suite runs a bundle of exact identities, certified inequalities, and
calibrated statistical windows at fixed sample budgets, and returns a
structured record with one entry per contract.  The command-line `verify`
subcommand and the acceptance test module both run these.
"""
from __future__ import annotations

import math
import time

import numpy as np

from . import ensembles as ens
from .alpha import alpha, bilinear_sup_quadratic, ehz_from_conjugated_form, lipschitz_gap
from .bodies import Family, FamilySpec, make_body
from .functionals import (
    circumradius,
    contact_point,
    inradius,
    mean_width,
    nondeg_functional,
    scaling_summary_row,
    section_mean_width,
)
from .rotations import (
    RngStream,
    haar_rotation,
    haar_rotation_matrices,
    pushforward_identities,
    pushforward_uniformity_test,
    standard_J,
)

__all__ = ["SUITES", "run_suite", "ellipsoid_spec", "spec_for"]


def _check(name: str, passed: bool, **details) -> dict:
    rec = {"name": name, "passed": bool(passed)}
    rec.update(details)
    return rec


def _suite(name: str, checks: list[dict], t0: float) -> dict:
    return {"suite": name, "passed": all(c["passed"] for c in checks),
            "checks": checks, "elapsed_s": round(time.perf_counter() - t0, 3)}


def ellipsoid_spec(dim: int, head=(1.0, 4.0)) -> FamilySpec:
    """Axis pattern (1, 4, 4, ..., 4): the head extended by its last value."""
    n = dim // 2
    axes = list(head) + [head[-1]] * (n - len(head))
    return FamilySpec(Family.SYMPLECTIC_ELLIPSOID, dim, axes=tuple(axes[:n]))


def spec_for(family: str, dim: int) -> FamilySpec:
    if family == "cube":
        return FamilySpec(Family.CUBE, dim)
    if family == "cross":
        return FamilySpec(Family.CROSS_POLYTOPE, dim)
    if family == "ellipsoid":
        return ellipsoid_spec(dim)
    if family == "ball":
        return FamilySpec(Family.EUCLIDEAN_BALL, dim, radius=1.0)
    if family == "box":
        return FamilySpec(Family.SYMPLECTIC_BOX, dim, axes=ellipsoid_spec(dim).axes)
    raise ValueError(f"unknown family {family!r}")


# ---------------------------------------------------------------------------


def suite_pushforward(seed: int = 1) -> dict:
    """Per-sample conjugation identities and the uniformity of the
    J-pushforward on the orthogonal sphere."""
    t0 = time.perf_counter()
    checks = []
    gen = RngStream(seed, 1).generator()
    worst_t = worst_r = 0.0
    for dim in (8, 16):
        for k in range(50):
            A = gen.standard_normal((dim, dim))
            if k % 2 == 0:
                A = 0.5 * (A + A.T)
            y = gen.standard_normal(dim)
            y /= np.linalg.norm(y)
            O = haar_rotation(gen, dim)
            rec = pushforward_identities(A, y, O)
            worst_t = max(worst_t, abs(rec["t_obs"] - rec["t_pred"]))
            worst_r = max(worst_r, abs(rec["r_obs"] - rec["r_pred"]))
    checks.append(_check("conjugation identities (100 samples, dims 8/16)",
                         worst_t <= 1e-9 and worst_r <= 1e-9,
                         worst_t=worst_t, worst_r=worst_r, tol=1e-9))
    y = np.zeros(16)
    y[0] = 1.0
    res = pushforward_uniformity_test(RngStream(seed, 2), 16, y, 5000)
    checks.append(_check("uniformity KS on the orthogonal sphere (dim 16, n 5000)",
                         res["p_value"] >= 0.01, **res))
    return _suite("pushforward", checks, t0)


def suite_sandwich(seed: int = 1) -> dict:
    """Capacity times alpha stays in [1, 4] per rotated ellipsoid sample
    (it is exactly pi for quadratic bodies); unrotated products equal pi
    to near machine accuracy."""
    t0 = time.perf_counter()
    gen = RngStream(seed, 3).generator()
    dim, n_trials = 8, 500
    J = standard_J(dim)
    prods = np.empty(n_trials)
    for i in range(n_trials):
        a = np.sort(np.exp(gen.uniform(0.0, math.log(10.0), dim // 2)))
        C = np.diag(np.r_[math.pi / a, math.pi / a])
        O = haar_rotation_matrices(gen, dim, 1)[0]
        JO = O.T @ J @ O
        c = ehz_from_conjugated_form(JO @ C, float(np.linalg.norm(C, 2)))
        # alpha of the rotated ellipsoid: polar quad form is C^{-1}, so the
        # spectral value is the top singular value of C^{1/2} J(O) C^{1/2}
        lam = np.diag(C)
        a_val = np.linalg.svd(np.diag(lam ** 0.5) @ JO @ np.diag(lam ** 0.5),
                              compute_uv=False)[0]
        prods[i] = c * a_val
    ok_interval = bool(np.all(prods >= 1 - 1e-6) and np.all(prods <= 4 + 1e-6))
    checks = [_check("rotated ellipsoid products in [1, 4] (500 trials, dim 8)",
                     ok_interval, min=float(prods.min()), max=float(prods.max()))]
    worst = 0.0
    for _ in range(20):
        a = np.sort(np.exp(gen.uniform(0.0, math.log(10.0), dim // 2)))
        spec = FamilySpec(Family.SYMPLECTIC_ELLIPSOID, dim, axes=tuple(a))
        body = make_body(spec)
        from .alpha import ehz_ellipsoid

        prod = ehz_ellipsoid(body.quad_form()) * alpha(body).value
        worst = max(worst, abs(prod - math.pi))
    checks.append(_check("unrotated ellipsoid product equals pi", worst <= 1e-9,
                         worst_abs_dev=worst, tol=1e-9))
    return _suite("sandwich", checks, t0)


def suite_mean_identity(seed: int = 1, n_ens: int = 20000, n_ref: int = 1000000) -> dict:
    """Rotation-ensemble section widths against the spherical reference:
    the two pipelines estimate the same expectation."""
    t0 = time.perf_counter()
    body = make_body(FamilySpec(Family.CUBE, 16))
    out = ens.mean_identity_experiment(body, n_ens, RngStream(seed, 4), n_ref=n_ref)
    e, r = out["ensemble"], out["reference"]
    joint = math.sqrt(e.std_error**2 + r.std_error**2)
    gap = abs(e.estimate - r.estimate)
    checks = [_check("cube dim 16: ensemble vs spherical reference within 4 joint SE",
                     gap <= 4 * joint, ensemble=e.to_dict(), reference=r.to_dict(),
                     gap=gap, joint_se=joint)]
    return _suite("mean-identity", checks, t0)


def suite_lipschitz(seed: int = 1, n_pairs: int = 200) -> dict:
    """Rotation stability of alpha against the squared polar circumradius
    times the Hilbert-Schmidt distance, per pair."""
    t0 = time.perf_counter()
    checks = []
    for spec, tag in ((FamilySpec(Family.CUBE, 8), "cube dim 8"),
                      (ellipsoid_spec(8), "ellipsoid dim 8"),
                      (ellipsoid_spec(4), "ellipsoid dim 4")):
        body = make_body(spec)
        gen = RngStream(seed, 5).generator()
        worst = -np.inf
        ok = True
        for _ in range(n_pairs):
            O1 = haar_rotation(gen, spec.dim)
            O2 = haar_rotation(gen, spec.dim)
            rec = lipschitz_gap(body, O1, O2)
            slack = rec["rhs"] + 1e-9 - rec["lhs"]
            worst = max(worst, rec["lhs"] - rec["rhs"])
            ok = ok and slack >= 0
        checks.append(_check(f"{tag}: {n_pairs} Haar pairs", ok, worst_violation=worst))
    return _suite("lipschitz", checks, t0)


def suite_concentration(seed: int = 1, n: int = 4000) -> dict:
    """Empirical spread of alpha over the cube family shrinks with
    dimension."""
    t0 = time.perf_counter()
    dims = (8, 16, 32, 64)
    profiles = ens.concentration_profile(
        lambda d: FamilySpec(Family.CUBE, d), dims, n, RngStream(seed, 6))
    sds = [p.sd for p in profiles]
    non_increasing = all(sds[i + 1] <= sds[i] * (1 + 1e-9) for i in range(len(sds) - 1))
    ratio_ok = sds[-1] <= 0.8 * sds[0]
    checks = [
        _check("cube SD of alpha non-increasing over dims 8..64", non_increasing,
               sds={d: s for d, s in zip(dims, sds)}),
        _check("SD(64) <= 0.8 SD(8)", ratio_ok, ratio=sds[-1] / sds[0]),
    ]
    return _suite("concentration", checks,  t0)


def suite_psi2(seed: int = 1, n: int = 100000) -> dict:
    """Subgaussian scaling of the pairing <J(O) x, y>: sqrt(n) times the
    psi2 estimate stays in a fixed window across dimensions."""
    t0 = time.perf_counter()
    checks = []
    for k, dim in enumerate((8, 32, 128)):
        xs = ens.xi_pair_samples(RngStream(seed, 7 + k), dim, n)
        est = ens.psi2_norm_estimate(xs)
        val = math.sqrt(dim // 2) * est
        checks.append(_check(f"dim {dim}: sqrt(n) * psi2 in [0.2, 3]",
                             0.2 <= val <= 3.0, scaled=val, psi2=est))
    return _suite("psi2", checks, t0)


def suite_counterexample(seed: int = 1, n: int = 2000) -> dict:
    """Ball-product growth sweep: the certified capacity lower bound
    diverges along the lambda grid while the inradius / section-width
    anchor stays within a bounded band."""
    t0 = time.perf_counter()
    rows = ens.ball_product_growth_sweep((1.0, 4.0, 16.0, 64.0), 8, n,
                                         RngStream(seed, 11))
    ests = [r["capacity_lower_bound"].estimate for r in rows]
    increasing = all(ests[i + 1] > ests[i] for i in range(len(ests) - 1))
    growth = ests[-1] / ests[0]
    anchors = [r["anchor_ratio"] for r in rows]
    band = max(anchors) / min(anchors)
    checks = [
        _check("capacity lower bound strictly increasing, final/initial >= 3",
               increasing and growth >= 3.0, estimates=ests, growth=growth),
        _check("anchor ratio within factor 1.5 across the sweep", band <= 1.5,
               anchors=anchors, band=band),
    ]
    return _suite("counterexample", checks, t0)


def suite_nondeg(seed: int = 1, n: int = 50000) -> dict:
    """Non-degeneracy functional: bounded at q = 1/2 for the summary
    families and exactly one for the ball at every q."""
    t0 = time.perf_counter()
    checks = []
    for fam in ("cube", "cross", "ellipsoid"):
        body = make_body(spec_for(fam, 16))
        res = nondeg_functional(body, 0.5, n, RngStream(seed, 21))
        checks.append(_check(f"{fam} dim 16: ND_1/2 <= 5", res.estimate <= 5.0,
                             value=res.estimate, std_error=res.std_error))
    ball = make_body(FamilySpec(Family.EUCLIDEAN_BALL, 16, radius=1.0))
    for q in (0.5, 1.0, 2.0):
        res = nondeg_functional(ball, q, 10000, RngStream(seed, 22))
        checks.append(_check(f"ball: ND_q = 1 within 4 SE at q={q}",
                             abs(res.estimate - 1.0) <= 4 * res.std_error + 1e-12,
                             value=res.estimate, std_error=res.std_error))
    return _suite("nondeg", checks, t0)


# ---------------------------------------------------------------------------
# expectation bounds and the scaling table (not CLI verify suites, but
# bundled here so the acceptance tests and scripts share budgets)


def expectation_bound_records(seed: int = 1, n_ens: int = 1500,
                              n_ref: int = 150000) -> list[dict]:
    records = []
    for fam in ("cube", "cross", "ellipsoid"):
        for dim in (8, 16, 32):
            spec = spec_for(fam, dim)
            body = make_body(spec)
            heuristic = fam == "cross" and dim > 20
            samples = ens.alpha_ensemble(body, n_ens, RngStream(seed, 31),
                                         allow_heuristic=heuristic)
            e_alpha = ens.moment_root(samples, 1.0, seed)
            cp = contact_point(body)
            v_unit = cp.v / np.linalg.norm(cp.v)
            R = circumradius(body.polar())
            msec = section_mean_width(body.polar(), v_unit, n_ref, RngStream(seed, 32))
            anchor = msec.scaled(R)
            joint = math.sqrt(e_alpha.std_error**2 + anchor.std_error**2)
            records.append({
                "family": fam, "dim": dim, "heuristic_alpha": heuristic,
                "e_alpha": e_alpha, "anchor": anchor, "joint_se": joint,
                "ratio": e_alpha.estimate / anchor.estimate,
            })
    return records


def scaling_table_records(seed: int = 1, n: int = 100000) -> list[dict]:
    rows = []
    for k, dim in enumerate((8, 16, 32, 64)):
        rows.append(scaling_summary_row(FamilySpec(Family.CUBE, dim), n,
                                        RngStream(seed, 41 + k)))
    return rows


SUITES = {
    "pushforward": suite_pushforward,
    "sandwich": suite_sandwich,
    "mean-identity": suite_mean_identity,
    "lipschitz": suite_lipschitz,
    "concentration": suite_concentration,
    "psi2": suite_psi2,
    "counterexample": suite_counterexample,
    "nondeg": suite_nondeg,
}


def run_suite(name: str, seed: int = 1) -> dict:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    return SUITES[name](seed)
