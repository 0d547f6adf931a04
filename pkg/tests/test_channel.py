import numpy as np
import pytest
from hypothesis import given, strategies as st

from risdrl.channel import (
    ChannelRealization,
    OfflineDataset,
    PathLossParams,
    RicianFactors,
    ScenarioGeometry,
    generate_offline_dataset,
    link_distances,
    load_dataset,
    los_components,
    make_long_term_csi,
    noise_power,
    path_loss_linear,
    sample_batch,
    sample_realization,
    save_dataset,
    steering_vector,
)
from risdrl.config import DEFAULT_BS_POSITION, DEFAULT_RIS_POSITION, DEFAULT_USER_DISK_CENTER
from tests.helpers import random_csi


def test_steering_vector_entries():
    a = steering_vector(4, np.pi / 2)
    np.testing.assert_allclose(a, [1, 1j, -1, -1j], atol=1e-12)


@given(st.integers(1, 64), st.floats(-10, 10))
def test_steering_vector_has_unit_modulus(x, theta):
    a = steering_vector(x, theta)
    assert a.shape == (x,)
    np.testing.assert_allclose(np.abs(a), 1.0, atol=1e-12)


def test_steering_vector_rejects_empty_array():
    with pytest.raises(ValueError):
        steering_vector(0, 0.3)


def test_path_loss_matches_db_formula():
    params = PathLossParams(pl0_db=-30.0, d0=1.0)
    assert path_loss_linear(params, 10.0, 2.0) == pytest.approx(1e-5)
    assert path_loss_linear(params, 1.0, 3.5) == pytest.approx(1e-3)


@pytest.mark.parametrize("distance", [0.0, -1.0])
def test_path_loss_rejects_nonpositive_distance(distance):
    with pytest.raises(ValueError):
        path_loss_linear(PathLossParams(), distance, 2.2)


def test_path_loss_decreases_with_distance():
    gains = path_loss_linear(PathLossParams(), np.array([1.0, 10.0, 100.0]), 2.2)
    assert np.all(np.diff(gains) < 0)


def test_noise_power_over_one_megahertz():
    # -174 dBm/Hz + 60 dB = -114 dBm
    assert noise_power(PathLossParams()) == pytest.approx(10 ** (-14.4), rel=1e-9)


def test_users_land_on_the_disk():
    rng = np.random.default_rng(3)
    geometry = ScenarioGeometry.generate(
        DEFAULT_BS_POSITION, DEFAULT_RIS_POSITION, DEFAULT_USER_DISK_CENTER, 20.0, 50, rng
    )
    offsets = geometry.user_positions - np.asarray(DEFAULT_USER_DISK_CENTER)
    assert geometry.num_users == 50
    assert np.all(np.hypot(offsets[:, 0], offsets[:, 1]) <= 20.0 + 1e-9)
    np.testing.assert_allclose(offsets[:, 2], 0.0)


def test_link_distances_of_default_layout():
    geometry = ScenarioGeometry.generate(
        DEFAULT_BS_POSITION, DEFAULT_RIS_POSITION, DEFAULT_USER_DISK_CENTER, 0.0, 1, np.random.default_rng(0)
    )
    distances = link_distances(geometry)
    assert distances.bs_ris == pytest.approx(np.sqrt(100**2 + 20**2 + 20**2))
    assert distances.bs_user[0] == pytest.approx(np.sqrt(150**2 + 28.5**2))


def test_colocated_nodes_are_rejected():
    with pytest.raises(ValueError):
        ScenarioGeometry.generate((0, 0, 0), (0, 0, 0), (5, 0, 0), 1.0, 2, np.random.default_rng(0))


def test_long_term_csi_shapes_and_angle_range():
    rng = np.random.default_rng(5)
    geometry = ScenarioGeometry.generate(
        DEFAULT_BS_POSITION, DEFAULT_RIS_POSITION, DEFAULT_USER_DISK_CENTER, 20.0, 3, rng
    )
    csi = make_long_term_csi(geometry, PathLossParams(), M=4, N=6, num_paths=2, rician=RicianFactors(), rng=rng)
    assert (csi.M, csi.N, csi.K, csi.I) == (4, 6, 3, 2)
    assert csi.G_bar.shape == (6, 4)
    assert csi.g_bar.shape == (3, 6)
    assert csi.h_bar.shape == (3, 4)
    for angles in (csi.aoa_bs_ris, csi.aod_bs_ris, csi.aod_ris_user, csi.aod_bs_user):
        assert np.all((angles >= 0) & (angles < 2 * np.pi))
    # BS-user links are longer and steeper than BS-RIS
    assert np.all(csi.gamma < csi.kappa)


def test_los_components_match_stored_values():
    csi = random_csi(3, 5, 2, I=2, seed=1)
    G_bar, g_bar, h_bar = los_components(csi)
    np.testing.assert_allclose(G_bar, csi.G_bar)
    np.testing.assert_allclose(g_bar, csi.g_bar)
    np.testing.assert_allclose(h_bar, csi.h_bar)
    assert np.max(np.abs(csi.G_bar)) <= 2.0 + 1e-12


def test_angles_do_not_depend_on_ris_size():
    def build(N):
        rng = np.random.default_rng(9)
        geometry = ScenarioGeometry.generate(
            DEFAULT_BS_POSITION, DEFAULT_RIS_POSITION, DEFAULT_USER_DISK_CENTER, 20.0, 4, rng
        )
        return make_long_term_csi(geometry, PathLossParams(), M=4, N=N, num_paths=1, rician=RicianFactors(), rng=rng)

    small, large = build(4), build(32)
    np.testing.assert_array_equal(small.aod_ris_user, large.aod_ris_user)
    np.testing.assert_array_equal(small.beta, large.beta)


def test_rician_moments_match_closed_form():
    delta, epsilon, eta = 2.2, 3.75, 2.2
    csi = random_csi(2, 3, 2, I=1, seed=4, kappa=0.5, gain=2.0, rician=(delta, epsilon, eta))
    n = 100_000
    G, g, h = sample_batch(csi, n, np.random.default_rng(123))
    for samples, scale, factor, los in (
        (G, csi.kappa, delta, csi.G_bar),
        (g, csi.beta[0], epsilon, csi.g_bar),
        (h, csi.gamma[0], eta, csi.h_bar),
    ):
        los_magnitude = np.sqrt(scale * factor / (factor + 1.0))
        expected_mean = los_magnitude * los
        assert np.max(np.abs(samples.mean(axis=0) - expected_mean)) <= 0.02 * los_magnitude
        expected_var = scale / (factor + 1.0)
        np.testing.assert_allclose(samples.var(axis=0), expected_var, rtol=0.05)


def test_zero_rician_factor_gives_zero_mean_channel():
    csi = random_csi(2, 3, 2, seed=5, kappa=0.5, gain=2.0, rician=(0.0, 0.0, 0.0))
    G, g, h = sample_batch(csi, 100_000, np.random.default_rng(321))
    for samples, scale in ((G, csi.kappa), (g, csi.beta[0]), (h, csi.gamma[0])):
        assert np.max(np.abs(samples.mean(axis=0))) < 0.02 * np.sqrt(scale)
        np.testing.assert_allclose(samples.var(axis=0), scale, rtol=0.05)


def test_infinite_rician_factor_gives_deterministic_channel():
    csi = random_csi(2, 2, 1, seed=2, rician=(np.inf, np.inf, np.inf))
    G, g, h = sample_batch(csi, 5, np.random.default_rng(0))
    np.testing.assert_allclose(G, np.broadcast_to(csi.G_bar, G.shape))
    np.testing.assert_allclose(h, np.broadcast_to(csi.h_bar, h.shape))


def test_sample_batch_rejects_empty_request(small_csi):
    with pytest.raises(ValueError):
        sample_batch(small_csi, 0, np.random.default_rng(0))


def test_sample_realization_shapes(small_csi):
    real = sample_realization(small_csi, np.random.default_rng(0), t=3)
    assert isinstance(real, ChannelRealization)
    assert real.dims == (2, 3, 2)
    assert real.t == 3


def test_offline_dataset_is_reproducible(small_csi):
    first = generate_offline_dataset(small_csi, 4, seed=17)
    second = generate_offline_dataset(small_csi, 4, seed=17)
    other = generate_offline_dataset(small_csi, 4, seed=18)
    np.testing.assert_array_equal(first.G, second.G)
    assert not np.allclose(first.g, other.g)
    assert [real.t for real in first] == [1, 2, 3, 4]


def test_offline_dataset_prefix_is_stable(small_csi):
    short = generate_offline_dataset(small_csi, 3, seed=5)
    long = generate_offline_dataset(small_csi, 6, seed=5)
    np.testing.assert_array_equal(short.h, long.h[:3])


def test_offline_dataset_checks_shapes():
    with pytest.raises(ValueError):
        OfflineDataset(G=np.zeros((2, 3, 2)), g=np.zeros((2, 2, 4)), h=np.zeros((2, 2, 2)))
    with pytest.raises(ValueError):
        OfflineDataset.from_realizations([])


def test_dataset_file_round_trip(tmp_path, small_dataset):
    path = tmp_path / "dataset.bin"
    save_dataset(path, small_dataset)
    M, N, K = small_dataset.dims
    T = len(small_dataset)
    assert path.stat().st_size == 4 * 8 + 2 * 8 * T * (N * M + K * N + K * M)
    loaded = load_dataset(path)
    np.testing.assert_array_equal(loaded.G, small_dataset.G)
    np.testing.assert_array_equal(loaded.g, small_dataset.g)
    np.testing.assert_array_equal(loaded.h, small_dataset.h)


def test_dataset_file_errors(tmp_path, small_dataset):
    with pytest.raises(FileNotFoundError):
        load_dataset(tmp_path / "missing.bin")
    path = tmp_path / "truncated.bin"
    save_dataset(path, small_dataset)
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(ValueError):
        load_dataset(path)
