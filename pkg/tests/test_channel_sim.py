import numpy as np
import pytest
from numpy.testing import assert_allclose

from subtrack.channel_sim import (ChannelTrajectory, PathSet, PulseShape,
                                  SimConfig, gen_symbols,
                                  generate_observations, latent_trajectory,
                                  noise_variance_for_snr, symbol_windows,
                                  synth_latent_channel, synth_physical_channel)
from subtrack.errors import InvalidInputError


def small_cfg(**kw):
    params = dict(n_taps=16, n_steps=200, n_train=60, r_true=3, seed=0)
    params.update(kw)
    return SimConfig(**params)


# ---------------------------------------------------------------- physical
def test_physical_zero_amplitudes():
    cfg = small_cfg()
    paths = PathSet(amplitudes=np.zeros((2, cfg.n_steps)),
                    delays=np.full((2, cfg.n_steps), 3.0))
    traj = synth_physical_channel(paths, PulseShape.impulse(), cfg)
    assert not np.any(traj.h)


def test_physical_on_grid_impulse():
    cfg = small_cfg()
    amp = 0.7 - 0.2j
    paths = PathSet(amplitudes=np.full((1, cfg.n_steps), amp),
                    delays=np.full((1, cfg.n_steps), 5.0))
    traj = synth_physical_channel(paths, PulseShape.impulse(), cfg)
    assert_allclose(traj.h[:, 5], amp, atol=1e-12)
    off = np.delete(traj.h, 5, axis=1)
    assert np.max(np.abs(off)) < 1e-12


def test_physical_off_grid_matches_direct_interpolation():
    cfg = small_cfg(n_steps=4, n_train=2)
    pulse = PulseShape.raised_cosine(span_symbols=8)
    delay = 3.5
    paths = PathSet(amplitudes=np.ones((1, cfg.n_steps)),
                    delays=np.full((1, cfg.n_steps), delay))
    traj = synth_physical_channel(paths, pulse, cfg)

    # Oracle: direct sinc-interpolation sum, written independently.
    center = 0.5 * (pulse.taps.size - 1)
    for k in range(cfg.n_taps):
        want = sum(pulse.taps[j] * np.sinc((k - delay) - (j - center))
                   for j in range(pulse.taps.size))
        assert_allclose(traj.h[0, k], want, atol=1e-12)
    assert np.min(np.abs(traj.h[0, 2:6])) > 1e-3  # energy spread over taps 2..5


def test_physical_energy_conservation_off_grid():
    cfg = small_cfg(n_taps=64, n_steps=3, n_train=2)
    pulse = PulseShape.raised_cosine(span_symbols=12)
    amp = 1.3 * np.exp(0.4j)
    paths = PathSet(amplitudes=np.full((1, cfg.n_steps), amp),
                    delays=np.full((1, cfg.n_steps), 26.37))
    traj = synth_physical_channel(paths, pulse, cfg)
    energy = np.sum(np.abs(traj.h[0]) ** 2)
    want = abs(amp) ** 2 * pulse.energy
    assert abs(energy - want) / want < 1e-3


def test_physical_delay_bounds():
    cfg = small_cfg()
    paths = PathSet(amplitudes=np.ones((1, cfg.n_steps)),
                    delays=np.full((1, cfg.n_steps), cfg.n_taps - 0.5))
    with pytest.raises(InvalidInputError):
        synth_physical_channel(paths, PulseShape.raised_cosine(), cfg)


def test_physical_cross_tap_coherence():
    from subtrack.metrics import cross_path_coherence
    cfg = small_cfg(n_taps=32, n_steps=4000)
    rng = np.random.default_rng(9)
    amp = (rng.standard_normal(cfg.n_steps) + 1j * rng.standard_normal(cfg.n_steps))
    paths = PathSet(amplitudes=amp[np.newaxis, :],
                    delays=np.full((1, cfg.n_steps), 10.4))
    traj = synth_physical_channel(paths, PulseShape.raised_cosine(span_symbols=8), cfg)
    rho = cross_path_coherence(traj.h, kind="taps").rho
    assert abs(rho[10, 11]) > 0.5  # adjacent taps under one path stay coherent


def test_pulse_needs_energy():
    with pytest.raises(InvalidInputError):
        PulseShape(taps=np.zeros(4), span_symbols=4)


# ------------------------------------------------------------------ latent
def test_latent_frozen_dynamics():
    rng = np.random.default_rng(0)
    q0, _ = np.linalg.qr(rng.standard_normal((8, 2)))
    traj, truth = latent_trajectory(q0, None, 0.0, np.array([1.0, 1.0]),
                                    np.zeros((2, 2)), 50, rng)
    assert np.max(np.abs(traj.h - traj.h[0])) < 1e-12
    assert np.linalg.norm(traj.h[0]) > 0


def test_latent_static_basis_rank():
    cfg = small_cfg(n_taps=24, n_steps=800, r_true=4, omega_q=0.0)
    traj, _ = synth_latent_channel(cfg)
    cov = traj.h.T @ traj.h.conj() / cfg.n_steps
    evals = np.linalg.eigvalsh(cov)[::-1]
    assert evals[4] < 1e-8 * evals[0]


def test_latent_determinism():
    cfg = small_cfg(seed=42)
    t1, g1 = synth_latent_channel(cfg)
    t2, g2 = synth_latent_channel(small_cfg(seed=42))
    assert np.array_equal(t1.h, t2.h)
    assert np.array_equal(g1.z_true, g2.z_true)
    assert np.array_equal(g1.q_true, g2.q_true)


def test_latent_projection_recovers_components():
    cfg = small_cfg(preset="calm", omega_q=5e-3)
    traj, truth = synth_latent_channel(cfg)
    for n in (0, 50, 199):
        z = truth.q_true[n].conj().T @ traj.h[n]
        assert_allclose(z, truth.z_true[n], atol=1e-10)


def test_latent_basis_stays_orthonormal():
    cfg = small_cfg(n_steps=500, omega_q=2e-3)
    _, truth = synth_latent_channel(cfg)
    last = truth.q_true[-1]
    assert_allclose(last.conj().T @ last, np.eye(cfg.r_true), atol=1e-10)


def test_latent_rejects_bad_rank():
    with pytest.raises(InvalidInputError):
        small_cfg(r_true=20, n_taps=16)


def test_preset_parameters():
    calm = SimConfig.for_preset("calm")
    rough = SimConfig.for_preset("rough")
    assert calm.omega_q == 2e-4 and calm.phi_drift == 0.0
    assert rough.omega_q == 2e-3 and rough.phi_drift == 0.05


def test_rough_preset_drifts_phi():
    cfg = SimConfig.for_preset("rough", n_taps=16, n_steps=400, n_train=100,
                               r_true=3, seed=1)
    _, truth = synth_latent_channel(cfg)
    drop = truth.phi_true[0].real - truth.phi_true[-1].real
    assert_allclose(drop, 0.05, atol=1e-12)


# ----------------------------------------------------------------- symbols
def test_symbols_unit_magnitude():
    sym = gen_symbols(512, seed=3)
    assert_allclose(np.abs(sym), 1.0, atol=1e-12)


def test_symbols_zero_mean_monte_carlo():
    sym = gen_symbols(100_000, seed=4)
    assert abs(sym.mean()) < 0.02  # 3/sqrt(N) bound with margin


def test_symbols_deterministic():
    assert np.array_equal(gen_symbols(64, seed=9), gen_symbols(64, seed=9))


def test_symbols_validates_length():
    with pytest.raises(InvalidInputError):
        gen_symbols(0)


# ------------------------------------------------------------ observations
def test_observations_noiseless_scalar():
    traj = ChannelTrajectory(
        h=np.full((20, 1), 0.3 - 0.1j), t_tap=1.0, t_snapshot=1.0)
    obs = generate_observations(traj, np.ones(20), 0.0, seed=0)
    assert_allclose(obs.r, 0.3 - 0.1j, atol=1e-14)


def test_observations_dot_product_oracle():
    cfg = small_cfg(n_steps=64)
    traj, _ = synth_latent_channel(cfg)
    symbols = gen_symbols(cfg.n_steps, seed=5)
    obs = generate_observations(traj, symbols, 0.0, seed=6)
    padded = np.concatenate([np.zeros(cfg.n_taps - 1, complex), symbols])
    for n in range(cfg.n_steps):
        window = padded[n:n + cfg.n_taps][::-1]  # newest first
        want = sum(window[k] * traj.h[n, k] for k in range(cfg.n_taps))
        assert_allclose(obs.r[n], want, atol=1e-12)


def test_observations_noise_variance_monte_carlo():
    traj = ChannelTrajectory(
        h=np.zeros((100_000, 2)), t_tap=1.0, t_snapshot=1.0)
    obs = generate_observations(traj, gen_symbols(100_000, seed=7), 1.0, seed=8)
    assert abs(np.mean(np.abs(obs.r) ** 2) - 1.0) < 0.03


def test_observations_reject_negative_variance():
    traj, _ = synth_latent_channel(small_cfg())
    with pytest.raises(InvalidInputError):
        generate_observations(traj, gen_symbols(200, seed=1), -0.1)


def test_symbol_windows_layout():
    windows = symbol_windows(np.array([1.0, 2.0, 3.0]), 2)
    assert_allclose(windows, [[1, 0], [2, 1], [3, 2]])


def test_noise_variance_for_snr():
    traj = ChannelTrajectory(
        h=np.ones((10, 4)), t_tap=1.0, t_snapshot=1.0)
    assert_allclose(noise_variance_for_snr(traj, 10.0), 0.4)
