"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines as they complete. Monte Carlo criteria are seed-fixed and
deterministic.
"""

import math
import time

import numpy as np
import pytest

from covshift import (
    CovarianceScan,
    adaptive_sdp_test,
    adaptive_test,
    covariance_test,
    dual_upper_bound,
    dyadic_grid,
    loglog8n,
    minimax_lower_bound,
    minimax_rate,
    mixture_chisq_uni,
    operator_norm,
    relaxed_sparse_eigmax,
    sparse_abs_eigmax,
    sparsity_grid,
    variance_test,
)
from covshift.simulate import (
    PriorSpec,
    calibrate_lambda,
    chisq_cross_term,
    detection_boundary_uni,
    monte_carlo_errors,
    null_series,
    sample_alternative,
    sample_series,
)

from conftest import rand_psd, rand_sym
from test_simulate import mc_cross_moment_oracle
from test_sparse_eig import oracle_sparse_eig

pytestmark = pytest.mark.acceptance


def announce(cid, ok, detail):
    print(f"\n[ACCEPTANCE] {cid}: {'PASS' if ok else 'FAIL'} | {detail}")
    assert ok, f"{cid}: {detail}"


def test_c01_sparse_eigenvalue_oracle_equivalence():
    start = time.time()
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(200):
        p = int(rng.integers(2, 8))
        A = rand_sym(rng, p, scale=float(rng.uniform(0.3, 3.0)))
        for s in range(1, p + 1):
            mine = sparse_abs_eigmax(A, s).value
            ref = oracle_sparse_eig(A, s)
            worst = max(worst, abs(mine - ref))
            assert abs(mine - ref) <= 1e-10 * max(1.0, ref)
            # random s-sparse directions can only fall below the enumerated value
            sup = rng.integers(0, p, size=(500, s))
            cf = rng.standard_normal((500, s))
            V = np.zeros((500, p))
            np.put_along_axis(V, sup, cf, axis=1)
            V /= np.linalg.norm(V, axis=1, keepdims=True)
            searched = np.abs(np.einsum("ij,jk,ik->i", V, A, V)).max()
            assert searched <= mine + 1e-10
    elapsed = time.time() - start
    announce("C1", elapsed < 60, f"worst oracle deviation {worst:.2e}, {elapsed:.1f}s")


def test_c02_sdp_sandwich_and_gap():
    start = time.time()
    rng = np.random.default_rng(102)
    converged = 0
    total = 200
    for _ in range(total):
        p = int(rng.integers(2, 13))
        s = min(int(rng.choice([1, 2, 4])), p)
        A = rand_sym(rng, p, scale=float(rng.uniform(0.3, 3.0)))
        sol = relaxed_sparse_eigmax(A, s, tol=1e-3)
        exact = sparse_abs_eigmax(A, s).value
        cap = s * float(np.abs(A).max())
        assert exact - 1e-8 <= sol.upper, "upper endpoint below exact sparse eigenvalue"
        assert sol.lower <= cap + 1e-8, "lower endpoint above s * max|A|"
        assert sol.lower <= sol.upper + 1e-12
        if sol.converged:
            assert sol.gap <= 1e-3 * max(1.0, cap) + 1e-12
            converged += 1
    elapsed = time.time() - start
    frac = converged / total
    announce(
        "C2",
        frac >= 0.95 and elapsed < 300,
        f"certified gap closed on {converged}/{total} ({frac:.1%}), {elapsed:.1f}s",
    )


def test_c03_psd_one_sparse_identity():
    start = time.time()
    rng = np.random.default_rng(103)
    worst = 0.0
    for _ in range(100):
        p = int(rng.integers(1, 13))
        S = rand_psd(rng, p, scale=float(rng.uniform(0.3, 3.0)))
        sol = relaxed_sparse_eigmax(S, 1)
        target = float(np.abs(S).max())
        dev = max(abs(sol.lower - target), abs(sol.upper - target))
        worst = max(worst, dev)
        assert dev <= 1e-8 * max(1.0, target)
    elapsed = time.time() - start
    announce("C3", elapsed < 30, f"worst deviation {worst:.2e}, {elapsed:.1f}s")


def test_c04_chisq_closed_form_against_monte_carlo():
    start = time.time()
    rng = np.random.default_rng(104)
    worst_z = 0.0
    for trial in range(20):
        d1 = int(rng.integers(1, 5))
        d2 = int(rng.integers(d1, 7))
        s2 = float(rng.uniform(0.5, 2.0))
        k1 = float(rng.uniform(0.1, 0.5)) * s2
        k2 = float(rng.uniform(0.1, 0.5)) * s2
        u1 = rng.standard_normal(2)
        u1 /= np.linalg.norm(u1)
        u2 = rng.standard_normal(2)
        u2 /= np.linalg.norm(u2)
        closed = chisq_cross_term(d1, d2, k1, k2, s2, float(u1 @ u2)).value
        est, se = mc_cross_moment_oracle(
            d1, d2, k1, k2, s2, u1, u2, reps=1_000_000, seed=trial
        )
        z = abs(closed - est) / se
        worst_z = max(worst_z, z)
        assert z <= 4.0, f"closed form {closed} vs MC {est} +- {se} (z={z:.2f})"
    # envelope never violated across a broad random sweep
    for _ in range(10_000):
        d1 = int(rng.integers(1, 64))
        d2 = int(rng.integers(d1, 128))
        s2 = float(rng.uniform(0.1, 10))
        k1 = float(rng.uniform(0.01, 0.99)) * s2
        k2 = float(rng.uniform(0.01, 0.99)) * s2
        v = chisq_cross_term(d1, d2, k1, k2, s2, float(rng.uniform(-1, 1)))
        assert v.value <= v.bound * (1 + 1e-12)
    elapsed = time.time() - start
    announce("C4", elapsed < 300, f"worst |z| {worst_z:.2f} over 20 sets, {elapsed:.1f}s")


def test_c05_prior_draws_reproduce_signal_strength():
    from covshift import signal_strength_multi, signal_strength_uni

    start = time.time()
    uni = PriorSpec("uni", n=512, p=1, sigma_sq=1.7, rho=5.3)
    for r in range(10_000):
        d = sample_alternative(uni, [105, r])
        rho = signal_strength_uni(d.delta, uni.n, d.Sigma1[0, 0], d.Sigma2[0, 0])
        assert abs(rho - uni.rho) <= 1e-12 * uni.rho
    multi = PriorSpec("multi", n=256, p=8, s=3, sigma_sq=2.2, rho=4.1)
    for r in range(10_000):
        d = sample_alternative(multi, [106, r])
        rho = signal_strength_multi(d.delta, multi.n, d.Sigma1, d.Sigma2)
        assert abs(rho - multi.rho) <= 1e-12 * multi.rho
        attained = float(d.u @ (d.Sigma2 - d.Sigma1) @ d.u)
        norm = operator_norm(d.Sigma1 - d.Sigma2)
        assert abs(attained - norm) <= 1e-12 * max(1.0, norm)
    elapsed = time.time() - start
    announce("C5", elapsed < 60, f"20000 draws exact to 1e-12, {elapsed:.1f}s")


def _out_of_sample_type1(test, n, p, reps, seed):
    rejected = 0
    for r in range(reps):
        X = null_series(n, p, 1.0, [seed, r, 1])
        rejected += bool(test(X))
    return rejected / reps


def test_c06_type_one_control_after_calibration():
    start = time.time()
    reps = 2000
    rows = [
        ("uni n=256", "uni", 256, 1, {}, lambda X, lam: variance_test(X[:, 0], lam).reject),
        ("uni n=1024", "uni", 1024, 1, {}, lambda X, lam: variance_test(X[:, 0], lam).reject),
        ("oracle (256,8)", "oracle", 256, 8, {"s": 2},
         lambda X, lam: covariance_test(X, lam, 2, 1.0).reject),
        ("adaptive (256,8)", "adaptive", 256, 8, {},
         lambda X, lam: adaptive_test(X, lam).reject),
        ("adaptive-sdp (256,16)", "adaptive_sdp", 256, 16, {},
         lambda X, lam: adaptive_sdp_test(X, lam).reject),
    ]
    results = []
    ok = True
    for name, family, n, p, kw, make in rows:
        lam = calibrate_lambda(family, n, p=p, delta=0.1, reps=reps, seed=1601, **kw)
        rate = _out_of_sample_type1(lambda X: make(X, lam), n, p, reps, 1602)
        good = 0.06 <= rate <= 0.14
        ok = ok and good
        results.append(f"{name}: lam={lam:.3f} type1={rate:.4f}{'' if good else ' <-- out of band'}")
    elapsed = time.time() - start
    ok = ok and elapsed < 1200
    announce("C6", ok, "; ".join(results) + f"; {elapsed:.0f}s")


def _spike_power(test, n, p, s, ratio_target, reps, seed):
    """Power against a fixed mid-sample rank-one covariance drop whose
    squared relative size times the effective sample size hits the target."""
    t0 = n // 2
    a = math.sqrt(ratio_target / t0)
    rho = t0 * min(a, a * a)
    spec = PriorSpec("multi", n=n, p=p, sigma_sq=1.0, rho=rho, s=s)
    rejected = 0
    for r in range(reps):
        draw = sample_alternative(spec, [seed, r, 2], delta=t0)
        X = sample_series(draw, n, p, [seed, r, 3])
        rejected += bool(test(X))
    return rejected / reps


def test_c07_power_in_feasible_regime():
    start = time.time()
    n, p, reps = 1024, 8, 1000
    target = 0.9 - 0.03
    results = []
    ok = True

    lam_uni = calibrate_lambda("uni", n, delta=0.1, reps=2000, seed=1701)
    rho = 50 * loglog8n(n)
    spec = PriorSpec("uni", n=n, p=1, sigma_sq=1.0, rho=rho)
    rejected = 0
    for r in range(reps):
        draw = sample_alternative(spec, [1702, r, 2], delta=n // 2)
        x = sample_series(draw, n, 1, [1702, r, 3])[:, 0]
        rejected += variance_test(x, lam_uni).reject
    power = rejected / reps
    ok &= power >= target
    results.append(f"uni rho=50*loglog8n: power={power:.3f}")

    for s in (1, 2):
        lam = calibrate_lambda("oracle", n, p=p, s=s, delta=0.1, reps=2000, seed=1703)
        power = _spike_power(
            lambda X: covariance_test(X, lam, s, 1.0).reject,
            n, p, s, 50 * minimax_rate(p, n, s), reps, 1704,
        )
        ok &= power >= target
        results.append(f"oracle s={s}: power={power:.3f}")

    lam_ad = calibrate_lambda("adaptive", n, p=p, delta=0.1, reps=2000, seed=1705)
    for s in (1, 2):
        power = _spike_power(
            lambda X: adaptive_test(X, lam_ad).reject,
            n, p, s, 50 * minimax_rate(p, n, s), reps, 1706,
        )
        ok &= power >= target
        results.append(f"adaptive s={s}: power={power:.3f}")

    lam_sdp = calibrate_lambda("adaptive_sdp", n, p=p, delta=0.1, reps=2000, seed=1707)
    ell = max(math.log(math.e * p), loglog8n(n))
    for s in (1, 2):
        power = _spike_power(
            lambda X: adaptive_sdp_test(X, lam_sdp).reject,
            n, p, s, 50 * s * s * ell, reps, 1708,
        )
        ok &= power >= target
        results.append(f"adaptive-sdp s={s}: power={power:.3f}")

    elapsed = time.time() - start
    ok = ok and elapsed < 1200
    announce("C7", ok, "; ".join(results) + f"; target >= {target}; {elapsed:.0f}s")


def test_c08_detection_boundary_scaling():
    start = time.time()
    ratios = []
    details = []
    for n in (2**7, 2**9, 2**11, 2**13):
        lam = calibrate_lambda("uni", n, delta=0.1, reps=1000, seed=1801)
        rec = detection_boundary_uni(n, lam, reps=400, seed=1802)
        ratios.append(rec["rho_star_over_loglog8n"])
        details.append(f"n={n}: rho*/loglog8n={ratios[-1]:.1f}")
    spread = max(ratios) / min(ratios)
    elapsed = time.time() - start
    announce(
        "C8",
        spread <= 3.0 and elapsed < 1800,
        "; ".join(details) + f"; max/min={spread:.2f}; {elapsed:.0f}s",
    )


def test_c09_lower_bound_sanity():
    start = time.time()
    n = 2**10
    rho = 0.01 * loglog8n(n)
    chi2 = mixture_chisq_uni(n, 1.0, rho)
    bound = minimax_lower_bound(chi2)
    lam = calibrate_lambda("uni", n, delta=0.1, reps=1000, seed=1901)
    spec = PriorSpec("uni", n=n, p=1, sigma_sq=1.0, rho=rho)
    out = monte_carlo_errors(
        lambda X: variance_test(X[:, 0], lam).reject, spec, 1000, 1902
    )
    total_error = out.type1 + out.type2
    elapsed = time.time() - start
    announce(
        "C9",
        bound >= 0.9 and total_error >= 0.8 and elapsed < 600,
        f"chi2={chi2:.4f} bound={bound:.3f} type1+type2={total_error:.3f}; {elapsed:.0f}s",
    )


def test_c10_structural_property_suites():
    start = time.time()
    rng = np.random.default_rng(110)

    for _ in range(1000):  # sparse eigenvalue monotone in s
        p = int(rng.integers(2, 8))
        A = rand_sym(rng, p)
        vals = [sparse_abs_eigmax(A, s).value for s in range(1, p + 1)]
        assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))

    for _ in range(1000):  # doubling and difference bounds for PSD inputs
        p = int(rng.integers(2, 8))
        S1 = rand_psd(rng, p)
        S2 = rand_psd(rng, p)
        s0 = int(rng.integers(2, p + 1))
        s = int(rng.integers((s0 + 1) // 2, s0 + 1))
        assert sparse_abs_eigmax(S1, s0).value <= 4 * sparse_abs_eigmax(S1, s).value + 1e-12
        sd = int(rng.integers(1, p + 1))
        assert sparse_abs_eigmax(S1 - S2, sd).value <= max(
            sparse_abs_eigmax(S1, sd).value, sparse_abs_eigmax(S2, sd).value
        ) + 1e-12

    for _ in range(1000):  # univariate scan is exactly scale invariant
        x = rng.standard_normal(64)
        c = float(rng.uniform(0.01, 100)) * float(rng.choice([-1, 1]))
        a = variance_test(x, 2.0)
        b = variance_test(c * x, 2.0)
        assert a.reject == b.reject
        for ca, cb in zip(a.cells, b.cells):
            assert abs(ca.stat - cb.stat) <= 1e-10 * max(1.0, abs(ca.stat))

    for _ in range(1000):  # reversal and permutation invariance of the scan
        X = rng.standard_normal((32, 3))
        a = adaptive_test(X, 2.0)
        b = adaptive_test(X[::-1], 2.0)
        for ca, cb in zip(a.cells, b.cells):
            assert abs(ca.stat - cb.stat) <= 1e-10 * max(1.0, abs(ca.stat))
        perm = rng.permutation(3)
        c_ = adaptive_test(X[:, perm], 2.0)
        for ca, cc in zip(a.cells, c_.cells):
            assert abs(ca.stat - cc.stat) <= 1e-10 * max(1.0, abs(ca.stat))

    for _ in range(1000):  # relaxed solver equivariances
        p = int(rng.integers(2, 7))
        s = min(int(rng.choice([1, 2, 4])), p)
        A = rand_sym(rng, p)
        base = relaxed_sparse_eigmax(A, s)
        scale = max(1.0, s * float(np.abs(A).max()))
        perm = rng.permutation(p)
        P = np.eye(p)[perm]
        sol = relaxed_sparse_eigmax(P @ A @ P.T, s)
        assert abs(sol.lower - base.lower) <= 1e-8 * scale
        assert abs(sol.upper - base.upper) <= 1e-8 * scale

    elapsed = time.time() - start
    announce("C10", elapsed < 120, f"5 suites x 1000 instances, {elapsed:.1f}s")
