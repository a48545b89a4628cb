from pathlib import Path

import mpmath
import numpy as np
import pytest

from qreg import single_body as sb, state_evolution as se
from qreg.amp import (
    AMPConfig,
    AMPDivergence,
    AMPState,
    amp_run,
    amp_step,
    empirical_gen_error,
    energy,
    initial_state,
    population_derivative,
)
from qreg.codebook import build_uniform, quantize_vec
from qreg.data import Dataset, generate, normal_stream
from qreg.oracle import ridge_exact
from qreg.replica import ModelParams, solve

FIXTURE = Dataset.from_csv((Path(__file__).parent / "fixtures" / "amp_3x2.csv").read_text())
TERNARY = build_uniform(2, 1.0)


def fixture_state():
    return AMPState(
        m_bar=np.array([0.3, -0.7]),
        v=np.array([0.4, 0.9]),
        V_mu=np.array([0.2, 0.5, 0.1]),
        theta_mu=np.array([0.1, -0.2, 0.3]),
        Sigma=np.ones(2),
        R=np.zeros(2),
    )


def transcribe_step(mode, beta=10.0, lam=0.05):
    """One iteration written out line by line in 50-digit arithmetic."""
    mpmath.mp.dps = 50
    mp = mpmath.mpf
    X = [[mp(str(v)) for v in row] for row in FIXTURE.X]
    y = [mp(repr(float(v))) for v in FIXTURE.y]
    s = fixture_state()
    m = [mp(repr(float(v))) for v in s.m_bar]
    v = [mp(repr(float(v))) for v in s.v]
    Vp = [mp(repr(float(v))) for v in s.V_mu]
    thp = [mp(repr(float(v))) for v in s.theta_mu]
    M, N = 3, 2
    V = [sum(X[mu][i] ** 2 * v[i] for i in range(N)) for mu in range(M)]
    Sig = [1 / sum(X[mu][i] ** 2 / (V[mu] + 1) for mu in range(M)) for i in range(N)]
    th = [sum(X[mu][i] * m[i] for i in range(N)) - V[mu] * (y[mu] - thp[mu]) / (Vp[mu] + 1)
          for mu in range(M)]
    R = [m[i] + Sig[i] * sum(X[mu][i] * (y[mu] - th[mu]) / (V[mu] + 1) for mu in range(M))
         for i in range(N)]
    u = [R[i] / Sig[i] for i in range(N)]
    theta = [lam + 1 / Sig[i] for i in range(N)]
    levels = [mp(-1), mp(0), mp(1)]
    if mode == "soft":
        out_m, out_v = [], []
        for ui, ti in zip(u, theta):
            w = [mpmath.exp(-beta * (ti * d * d / 2 - ui * d)) for d in levels]
            z = sum(w)
            m1 = sum(d * wk for d, wk in zip(levels, w)) / z
            m2 = sum(d * d * wk for d, wk in zip(levels, w)) / z
            out_m.append(m1)
            out_v.append(beta * (m2 - m1 * m1))
    else:
        h = mpmath.sqrt(sum(ui * ui for ui in u) / N)
        out_m = [min(levels, key=lambda d: (abs(ui / ti - d), abs(d))) for ui, ti in zip(u, theta)]
        out_v = [sum(mpmath.npdf(ti * c / h) for c in (mp(-0.5), mp(0.5))) / h for ti in theta]
    return [float(x) for x in V], [float(x) for x in Sig], [float(x) for x in th], \
        [float(x) for x in R], [float(x) for x in out_m], [float(x) for x in out_v]


@pytest.mark.parametrize("mode", ["hard", "soft"])
def test_single_step_matches_high_precision_transcription(mode):
    cfg = AMPConfig(beta=10.0, lam=0.05, mode=mode, damping=1.0)
    got = amp_step(fixture_state(), FIXTURE, TERNARY, cfg)
    V, Sig, th, R, m, v = transcribe_step(mode)
    np.testing.assert_allclose(got.V_mu, V, rtol=1e-13)
    np.testing.assert_allclose(got.Sigma, Sig, rtol=1e-13)
    np.testing.assert_allclose(got.theta_mu, th, rtol=1e-13, atol=1e-15)
    np.testing.assert_allclose(got.R, R, rtol=1e-13, atol=1e-15)
    np.testing.assert_allclose(got.m_bar, m, rtol=1e-12, atol=1e-15)
    np.testing.assert_allclose(got.v, v, rtol=1e-12, atol=1e-15)


def test_first_step_with_zero_v_has_zero_V():
    d = generate(20, 30, seed=1)
    s0 = initial_state(d, 0)
    s0.v[:] = 0.0
    assert np.all(amp_step(s0, d, TERNARY, AMPConfig()).V_mu == 0.0)


def test_initial_state_is_seeded_standard_normal():
    d = generate(50, 60, seed=2)
    np.testing.assert_array_equal(initial_state(d, 9).m_bar, normal_stream(9, 3, 50))
    assert np.all(initial_state(d, 9).v == 1.0)


def test_single_site_zero_target():
    d = Dataset(np.array([[1.0]]), np.array([0.0]), np.array([0.0]), 0.0, 0)
    res = amp_run(d, build_uniform(4, 2.0), AMPConfig(lam=0.0, T_max=50))
    assert res.w_hat[0] == 0.0
    assert energy(res.w_hat, d, build_uniform(4, 2.0), 0.0) == 0.0


def test_dimension_mismatch_rejected():
    d = generate(5, 7, seed=0)
    with pytest.raises(ValueError):
        amp_step(initial_state(generate(4, 7, seed=0), 0), d, TERNARY, AMPConfig())
    with pytest.raises(ValueError):
        energy(np.zeros(4), d, TERNARY, 0.0)
    with pytest.raises(ValueError):
        empirical_gen_error(np.zeros(4), np.zeros(5), 0.0)


def test_no_data_rejected():
    d = Dataset(np.zeros((0, 3)), np.zeros(0), np.zeros(3), 0.0, 0)
    with pytest.raises(ValueError):
        amp_run(d, TERNARY)


def test_nonfinite_input_reports_site():
    d = generate(6, 9, seed=0)
    bad = Dataset(d.X, np.where(np.arange(9) == 4, np.nan, d.y), d.w0, 0.0, 0)
    with pytest.raises(AMPDivergence) as info:
        amp_step(initial_state(bad, 0), bad, TERNARY, AMPConfig())
    assert info.value.iteration == 1
    res = amp_run(bad, TERNARY)
    assert not res.converged and "non-finite" in res.message


def test_config_validation():
    for kw in (dict(beta=0), dict(damping=0), dict(damping=1.5), dict(T_max=0), dict(tol=0),
               dict(anneal=0.5), dict(lam=-1), dict(mode="lukewarm")):
        with pytest.raises(ValueError):
            AMPConfig(**kw)
    assert AMPConfig().damping == 1.0
    assert AMPConfig(mode="soft").damping == 0.7
    assert AMPConfig(beta=2, anneal=10, beta_max=150).beta_at(3) == 150


def test_population_derivative_matches_chi():
    rng = np.random.default_rng(0)
    cb = build_uniform(6, 2.0)
    u = rng.normal(0, 1.7, 200_000)
    v = population_derivative(u, np.full(u.size, 2.3), cb)
    h = np.sqrt(np.mean(u**2))
    assert v[0] == pytest.approx(sb.gauss_chi(sb.FieldContext(h, 2.3), cb), rel=1e-12)


def test_empirical_gen_error_examples():
    w0 = np.array([1.0, -2.0, 0.5])
    assert empirical_gen_error(w0, w0, 0.3) == pytest.approx(0.15)
    assert empirical_gen_error(np.zeros(3), w0, 0.3) == pytest.approx(0.5 * (0.3 + 5.25 / 3))


def test_empirical_gen_error_monte_carlo():
    rng = np.random.default_rng(5)
    N, sigma2 = 40, 0.2
    w0, w = rng.normal(size=N), rng.normal(size=N)
    x = rng.normal(0, 1 / np.sqrt(N), size=(100_000, N))
    y = x @ w0 + rng.normal(0, np.sqrt(sigma2), 100_000)
    mc = 0.5 * np.mean((y - x @ w) ** 2)
    assert empirical_gen_error(w, w0, sigma2) == pytest.approx(mc, rel=0.01)


def test_energy_examples():
    d = Dataset(np.ones((2, 2)), np.zeros(2), np.zeros(2), 0.0, 0)
    assert energy(np.array([0.1, -0.2]), d, TERNARY, 1.0) == 0.0
    fine = build_uniform(2000, 10.0)
    d = generate(100, 150, 1.0, 0.0, seed=3)
    q = quantize_vec(d.w0, fine)
    assert energy(d.w0, d, fine, 0.5) == pytest.approx(0.25 * q @ q, rel=1e-3)


def test_estimates_lie_on_codebook_and_beat_null():
    cb = build_uniform(6, 1.8)
    wins = 0
    for seed in range(20):
        d = generate(300, 420, 1.0, 1e-4, seed)
        res = amp_run(d, cb, AMPConfig(lam=0.01, T_max=60, seed=seed))
        assert set(res.w_hat) <= set(cb.levels)
        wins += energy(res.w_hat, d, cb, 0.01) <= energy(np.zeros(300), d, cb, 0.01)
    assert wins >= 19


def test_seed_determinism():
    d = generate(200, 280, 1.0, 1e-4, 8)
    a = amp_run(d, build_uniform(6, 1.8), AMPConfig(lam=0.01, T_max=20, seed=4))
    b = amp_run(d, build_uniform(6, 1.8), AMPConfig(lam=0.01, T_max=20, seed=4))
    assert a.w_hat.tobytes() == b.w_hat.tobytes()
    assert a.trajectory_csv() == b.trajectory_csv()
    assert a.summary_json() == b.summary_json()


def test_ridge_denoiser_reaches_exact_ridge():
    d = generate(400, 800, 1.0, 0.5, 2)
    res = amp_run(d, None, AMPConfig(lam=0.3, T_max=500, tol=1e-20))
    np.testing.assert_allclose(res.state.m_bar, ridge_exact(d, 0.3), atol=0.05)
    theory = solve(ModelParams(2.0, 1.0, 0.5, 0.3), None).gen_error
    assert res.gen_error == pytest.approx(theory, rel=0.05)


def test_noiseless_error_near_replica_and_above_quantization_floor():
    cb = build_uniform(62, 6.0)
    floor = sb.quadrature_oracle(lambda z: (z - quantize_vec(z, cb)) ** 2, nodes=16,
                                 breakpoints=cb.thresholds)
    theory = solve(ModelParams(3.0, 1.0, 0.0, 1e-6), cb).gen_error
    d = generate(1000, 3000, 1.0, 0.0, 1)
    res = amp_run(d, cb, AMPConfig(lam=1e-6, T_max=150))
    mse = 2 * res.gen_error
    assert floor * 0.95 <= mse <= 2 * floor
    assert res.gen_error == pytest.approx(theory, rel=0.1)


def test_tracks_state_evolution():
    p, cb = ModelParams(1.4, 1.0, 1e-4, 0.01), build_uniform(6, 1.7957)
    traj = se.se_run(p, cb, max_iter=15)
    d = generate(2500, 3500, 1.0, 1e-4, 0)
    z = np.zeros
    start = AMPState(z(2500), z(2500), z(3500), z(3500), np.ones(2500), z(2500))
    res = amp_run(d, cb, AMPConfig(lam=0.01, T_max=15), init=start)
    for (t, V, E), s in zip(res.trajectory, traj.states[1:]):
        if t >= 3:
            assert V == pytest.approx(s.V, rel=0.05), t
            assert E == pytest.approx(s.E, rel=0.05), t
