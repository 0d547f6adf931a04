import numpy as np

from risdrl.channel import LongTermCsi


def random_csi(M, N, K, *, I=1, seed=0, kappa=1.0, gain=1.0, rician=(2.2, 3.75, 2.2)):
    rng = np.random.default_rng(seed)
    two_pi = 2.0 * np.pi
    return LongTermCsi.from_angles(
        M=M,
        N=N,
        kappa=kappa,
        beta=[gain] * K,
        gamma=[gain] * K,
        delta=rician[0],
        epsilon=[rician[1]] * K,
        eta=[rician[2]] * K,
        aoa_bs_ris=rng.uniform(0, two_pi, I),
        aod_bs_ris=rng.uniform(0, two_pi, I),
        aod_ris_user=rng.uniform(0, two_pi, K),
        aod_bs_user=rng.uniform(0, two_pi, K),
    )
