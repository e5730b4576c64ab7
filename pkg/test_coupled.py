"""
模态耦合求解器测试
消去等价性、运动学缺陷恒等式、起步约定、爆破检测与增长率
"""

import numpy as np
from loguru import logger
import pytest

from src.model.core import ParameterError, Discretization, stiffness
from src.model.spectral import build_spectrum
from src.analysis.polynomials import characteristic_chi, chi_roots
from src.analysis.stability import classify, Classification
from src.solvers import coupled
from src.solvers.coupled import (
    Scheme,
    InitialData,
    ModalState,
    ModalTrajectory,
    step_explicit_rn,
    step_recurrence,
    step_implicit_reference,
    implicit_companion,
    startup_convention,
    startup_history,
    simulate,
    simulate_modes,
    kinematic_defect,
    growth_rate,
    max_growth,
)


def _random_case(rng, random_params):
    params = random_params()
    n_modes = int(rng.integers(1, 21))
    mode = build_spectrum(params, n_modes)[-1]
    alpha = float(10.0 ** rng.uniform(1.0, 5.0))
    dt = float(10.0 ** rng.uniform(-6.0, -2.0))
    init = InitialData(*rng.normal(size=3))
    return params, mode, alpha, dt, init


def _conditioning(params, mode, alpha, dt):
    """舍入误差相对 |η| 的放大量级"""
    m_s = params.structure_mass
    m_f = params.rho_f * mode.mu
    K = stiffness(params, mode)
    return 1.0 + alpha * dt / m_s + m_f / m_s + dt * dt * K / m_s


def test_one_step_by_hand(fixture_params):
    mode = build_spectrum(fixture_params, 1)[0]
    alpha, dt = 1e3, 5e-4
    m_s = fixture_params.structure_mass
    m_f = fixture_params.rho_f * mode.mu
    K = stiffness(fixture_params, mode)

    traj = simulate(Scheme.EXPLICIT_RN, fixture_params, Discretization(dt, 1, 1), mode, alpha,
                    InitialData(eta1=1.0, eta0=1.0, u0=0.0))

    # 平坦历史：Robin 右端项只剩 Kη
    u1 = -K / (alpha + m_f / dt)
    p1 = -m_f * u1 / dt
    eta2 = 1.0 + dt * dt / m_s * (p1 - K)
    assert traj.u[1] == pytest.approx(u1, rel=1e-13)
    assert traj.p[1] == pytest.approx(p1, rel=1e-12)
    assert traj.eta[2] == pytest.approx(eta2, rel=1e-13)


def test_recurrence_matches_explicit_steps(rng, random_params):
    """每一步显式 Robin-Neumann 的结果都满足五项递推"""
    for _ in range(100):
        params, mode, alpha, dt, init = _random_case(rng, random_params)
        traj = simulate(Scheme.EXPLICIT_RN, params, Discretization(dt, mode.index, 1000), mode, alpha, init)
        scale = _conditioning(params, mode, alpha, dt)
        eta = traj.eta

        for m in range(3, len(eta) - 1):
            history = (eta[m], eta[m - 1], eta[m - 2], eta[m - 3])
            predicted = step_recurrence(history, params, mode, alpha, dt)
            local = max(np.max(np.abs(eta[m - 3:m + 2])), abs(traj.u[m]) * dt)
            assert abs(predicted - eta[m + 1]) <= 1e-12 * scale * local


def test_recurrence_trajectory_matches_explicit(rng, fixture_params):
    """从第一步起两种推进给出同一序列 (根分离良好的参数区间)"""
    for _ in range(20):
        n_modes = int(rng.integers(1, 6))
        mode = build_spectrum(fixture_params, n_modes)[-1]
        alpha = float(10.0 ** rng.uniform(3.0, 4.0))
        dt = float(10.0 ** rng.uniform(-3.7, -3.0))
        init = InitialData(*rng.normal(size=3))
        d = Discretization(dt, n_modes, 1000)

        rn = simulate(Scheme.EXPLICIT_RN, fixture_params, d, mode, alpha, init)
        rec = simulate(Scheme.RECURRENCE, fixture_params, d, mode, alpha, init)
        n = min(len(rn.eta), len(rec.eta))
        running = np.maximum.accumulate(np.abs(rn.eta[:n]))
        assert np.all(np.abs(rn.eta[:n] - rec.eta[:n]) <= 1e-10 * running)
        assert rn.blow_up == rec.blow_up


def test_kinematic_defect_identity(rng, random_params):
    for _ in range(100):
        params, mode, alpha, dt, init = _random_case(rng, random_params)
        traj = simulate(Scheme.EXPLICIT_RN, params, Discretization(dt, mode.index, 1000), mode, alpha, init)
        m_s = params.structure_mass
        m_f = params.rho_f * mode.mu
        K = stiffness(params, mode)
        factor = 1.0 + m_s / (alpha * dt) + m_f / (alpha * dt) + K * dt / alpha

        for n in range(2, traj.n_steps):
            if n + 1 >= len(traj.eta):
                break
            window = np.max(np.abs(traj.eta[n - 2:n + 2]))
            scale = max(abs(traj.u[n]), window / dt) * factor
            assert abs(kinematic_defect(traj, n, params, alpha)) <= 1e-12 * scale


def test_kinematic_defect_range(fixture_params):
    mode = build_spectrum(fixture_params, 1)[0]
    traj = simulate(Scheme.EXPLICIT_RN, fixture_params, Discretization(1e-4, 1, 10), mode, 1e3,
                    InitialData(1.0, 1.0))
    with pytest.raises(ValueError):
        kinematic_defect(traj, 1, fixture_params, 1e3)
    with pytest.raises(ValueError):
        kinematic_defect(traj, 11, fixture_params, 1e3)


def test_recurrence_on_a_root(fixture_params):
    mode = build_spectrum(fixture_params, 1)[0]
    alpha, dt = 1e3, 5e-4
    chi = characteristic_chi(fixture_params, mode, alpha, dt)
    for y in chi_roots(fixture_params, mode, alpha, dt).roots:
        history = (y ** 3, y ** 2, y, 1.0 + 0.0j)
        predicted = step_recurrence(history, fixture_params, mode, alpha, dt)
        scale = sum(abs(c) * abs(y) ** k for k, c in enumerate(reversed(chi.c))) / abs(chi.c[0])
        assert abs(predicted - y ** 4) <= 1e-12 * scale


def test_recurrence_rejects_non_finite(fixture_params):
    mode = build_spectrum(fixture_params, 1)[0]
    with pytest.raises(ValueError):
        step_recurrence((1.0, np.nan, 1.0, 1.0), fixture_params, mode, 1e3, 1e-4)


def test_flat_startup_convention(fixture_params):
    history = startup_history(fixture_params, 1e3, 1e-4, InitialData(2.0, 2.0, 0.0))
    assert history == (2.0, 2.0, 2.0, 2.0)

    supplied = startup_history(fixture_params, 1e3, 1e-4, InitialData(1.0, 2.0, 0.5, eta_m1=3.0, eta_m2=4.0))
    assert supplied == (1.0, 2.0, 3.0, 4.0)


def test_alpha_zero_flat_trajectory_is_constant(fixture_params):
    mode = build_spectrum(fixture_params, 1)[0]
    d = Discretization(5e-4, 1, 500)
    for scheme in (Scheme.EXPLICIT_RN, Scheme.RECURRENCE):
        traj = simulate(scheme, fixture_params, d, mode, 0.0, InitialData(1.0, 1.0, 0.0))
        assert np.all(traj.eta == 1.0)
        assert not traj.blown_up


def test_negative_alpha_rejected(fixture_params):
    mode = build_spectrum(fixture_params, 1)[0]
    with pytest.raises(ParameterError, match="negative alpha"):
        simulate(Scheme.EXPLICIT_RN, fixture_params, Discretization(1e-4, 1, 10), mode, -1.0,
                 InitialData(1.0, 1.0))
    state = ModalState(eta_hist=(1.0, 1.0, 1.0, 1.0), u=0.0, p=0.0, step=1)
    with pytest.raises(ParameterError):
        step_explicit_rn(state, fixture_params, mode, -1.0, 1e-4)


def test_implicit_reference(rng, random_params):
    for _ in range(50):
        params, mode, _, dt, _ = _random_case(rng, random_params)
        radius = np.max(np.abs(np.linalg.eigvals(implicit_companion(params, mode, dt))))
        # 近重根时特征值误差约为 sqrt(eps)
        assert radius <= 1.0 + 1e-7

    params = random_params()
    mode = build_spectrum(params, 3)[-1]
    M = params.structure_mass + params.rho_f * mode.mu
    K = stiffness(params, mode)
    dt = 1e-3
    expected = M * (2.0 * 0.7 - 0.4) / (M + dt * dt * K)
    assert step_implicit_reference((0.7, 0.4, 0.0, 0.0), params, mode, dt) == pytest.approx(expected, rel=1e-14)


def test_implicit_reference_kinematics(fixture_params):
    mode = build_spectrum(fixture_params, 2)[-1]
    traj = simulate(Scheme.IMPLICIT_REF, fixture_params, Discretization(1e-3, 2, 100), mode, 0.0,
                    InitialData(1.0, 0.9))
    for n in range(1, traj.n_steps + 1):
        assert traj.u[n] == pytest.approx((traj.eta[n] - traj.eta[n - 1]) / traj.dt, rel=1e-12, abs=1e-12)
    assert not traj.blown_up


def test_blow_up_detection(fixture_params):
    mode = build_spectrum(fixture_params, 1)[0]
    d = Discretization(1e-2, 1, 5000)
    traj = simulate(Scheme.EXPLICIT_RN, fixture_params, d, mode, 1e5, InitialData(1.0, 1.0))
    assert traj.blown_up
    assert len(traj.eta) == traj.blow_up + 2
    assert abs(traj.eta[-1]) > 1e8 or not np.isfinite(traj.eta[-1])

    rows = traj.series()
    assert rows[0]["step"] == 0
    assert rows[-1]["blown_up"] is True
    assert list(rows[0]) == ["step", "time", "eta", "u", "p", "blown_up"]


def test_zero_displacement_with_velocity_not_flagged(fixture_params):
    mode = build_spectrum(fixture_params, 1)[0]
    traj = simulate(Scheme.EXPLICIT_RN, fixture_params, Discretization(1e-4, 1, 50), mode, 1e3,
                    InitialData(0.0, 0.0, 1.0))
    assert not traj.blown_up


def test_stable_parameters_decay(fixture_params):
    spectrum = build_spectrum(fixture_params, 5)
    alpha, dt = 1e3, 1e-4
    verdict = classify(fixture_params, spectrum, alpha, dt)
    assert verdict.classification is Classification.STABLE

    d = Discretization(dt, 5, 20000)
    trajectories = simulate_modes(Scheme.EXPLICIT_RN, fixture_params, d, spectrum, alpha, InitialData(1.0, 1.0))
    for traj in trajectories:
        assert not traj.blown_up
        head = np.max(np.abs(traj.eta[:1000]))
        tail = np.max(np.abs(traj.eta[-1000:]))
        assert tail < head


def _geometric(rate, n=400):
    eta = rate ** np.arange(n, dtype=float)
    return ModalTrajectory(Scheme.RECURRENCE, 1, 1e-3, eta, np.zeros(n - 1), np.zeros(n - 1))


def test_growth_rate_synthetic():
    assert growth_rate(_geometric(0.97), 100) == pytest.approx(0.97, rel=1e-12)
    assert growth_rate(_geometric(1.01), 100) == pytest.approx(1.01, rel=1e-12)
    assert max_growth([_geometric(0.9), _geometric(1.02)], 100) == pytest.approx(1.02, rel=1e-12)

    zero = ModalTrajectory(Scheme.RECURRENCE, 1, 1e-3, np.zeros(100), np.zeros(99), np.zeros(99))
    assert growth_rate(zero, 10) is None

    with pytest.raises(ValueError):
        growth_rate(_geometric(0.9, n=20), 15)


def test_growth_rate_matches_dominant_root(rng, fixture_params):
    """实主导根且与次根分离时，2000 步后的经验增长率与 |y₁| 相对误差 < 1e-4"""
    mode = build_spectrum(fixture_params, 1)[0]
    accepted = 0
    for _ in range(4000):
        dt = float(10.0 ** rng.uniform(-4.5, -3.5))
        alpha = float(rng.uniform(0.4, 0.8)) / dt
        roots = chi_roots(fixture_params, mode, alpha, dt)
        order = np.argsort(roots.moduli)[::-1]
        y1 = roots.roots[order[0]]
        first, second = roots.moduli[order[0]], roots.moduli[order[1]]
        if abs(y1.imag) > 1e-12 * first or not 1.06 < first < 1.35 or second / first > 0.95:
            continue

        init = InitialData(*rng.normal(size=3))
        traj = simulate(Scheme.RECURRENCE, fixture_params, Discretization(dt, 1, 2000), mode, alpha, init,
                        stop_on_blow_up=False)
        assert growth_rate(traj, 500) == pytest.approx(first, rel=1e-4)

        accepted += 1
        if accepted == 50:
            break
    assert accepted == 50


@pytest.mark.parametrize("scheme", list(Scheme))
def test_linearity_in_initial_data(fixture_params, scheme):
    """初值乘以 c，整条轨迹乘以 c"""
    mode = build_spectrum(fixture_params, 1)[0]
    d = Discretization(1e-4, 1, 500)
    init = InitialData(1.0, 0.5, 0.2)
    c = -3.5

    base = simulate(scheme, fixture_params, d, mode, 1e3, init)
    scaled = simulate(scheme, fixture_params, d, mode, 1e3, init.scaled(c))
    assert not base.blown_up and not scaled.blown_up
    # u、p 由位移差分反解，舍入放大约 1/(αΔt²)
    for name, rel in (("eta", 1e-12), ("u", 1e-9), ("p", 1e-9)):
        expected = c * getattr(base, name)
        tol = rel * np.max(np.abs(expected))
        np.testing.assert_allclose(getattr(scaled, name), expected, rtol=0, atol=tol)


@pytest.mark.parametrize("scheme", list(Scheme))
def test_zero_initial_data_stays_zero(fixture_params, scheme):
    mode = build_spectrum(fixture_params, 3)[-1]
    traj = simulate(scheme, fixture_params, Discretization(1e-3, 3, 300), mode, 1e3, InitialData(0.0, 0.0, 0.0))
    assert not traj.blown_up
    assert traj.n_steps == 300
    assert np.all(traj.eta == 0.0) and np.all(traj.u == 0.0) and np.all(traj.p == 0.0)


def test_kinematic_defect_of_implicit_reference(fixture_params):
    """隐式参考满足运动学条件，缺陷只剩负的三阶差分修正项"""
    mode = build_spectrum(fixture_params, 2)[-1]
    alpha, dt = 1e3, 1e-3
    traj = simulate(Scheme.IMPLICIT_REF, fixture_params, Discretization(dt, 2, 100), mode, alpha,
                    InitialData(1.0, 0.9))
    m_s = fixture_params.structure_mass
    eta = traj.eta
    for n in range(2, traj.n_steps):
        third = eta[n + 1] - 3.0 * eta[n] + 3.0 * eta[n - 1] - eta[n - 2]
        expected = -m_s * third / (alpha * dt * dt)
        scale = np.max(np.abs(eta[n - 2:n + 2])) * m_s / (alpha * dt * dt)
        assert kinematic_defect(traj, n, fixture_params, alpha) == pytest.approx(expected, rel=1e-12,
                                                                                 abs=1e-12 * scale)


def test_startup_convention_flagged(fixture_params):
    mode = build_spectrum(fixture_params, 1)[0]
    d = Discretization(1e-4, 1, 10)
    messages = []
    sink = logger.add(messages.append, level="WARNING", format="{message}")
    coupled._warn_startup.cache_clear()
    try:
        traj = simulate(Scheme.RECURRENCE, fixture_params, d, mode, 1e3, InitialData(1.0, 1.0, 0.3))
        supplied = simulate(Scheme.RECURRENCE, fixture_params, d, mode, 1e3,
                            InitialData(1.0, 1.0, 0.3, eta_m1=1.0, eta_m2=1.0))
    finally:
        logger.remove(sink)

    assert traj.metadata["startup"] == {"eta_m1": "eta0", "eta_m2": "reconstructed"}
    assert supplied.metadata["startup"] == {"eta_m1": "supplied", "eta_m2": "supplied"}
    assert startup_convention(InitialData(1.0, 1.0, eta_m1=2.0)) == {"eta_m1": "supplied", "eta_m2": "reconstructed"}
    assert len(messages) == 1
    assert "eta_m1=eta0, eta_m2=reconstructed" in messages[0]
