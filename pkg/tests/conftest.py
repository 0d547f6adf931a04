import hypothesis
import pytest

from risdrl.channel import generate_offline_dataset
from risdrl.settings import desk_scale_config
from tests.helpers import random_csi

hypothesis.settings.register_profile("risdrl", deadline=None, max_examples=50)
hypothesis.settings.load_profile("risdrl")


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run acceptance-scale tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def small_csi():
    return random_csi(2, 3, 2, seed=7)


@pytest.fixture
def small_dataset(small_csi):
    return generate_offline_dataset(small_csi, 6, seed=11)


@pytest.fixture
def tiny_config(tmp_path):
    """
    Desk preset shrunk so a full experiment finishes in seconds.
    """
    cfg = desk_scale_config()
    return cfg.model_copy(
        update={
            "scenario": cfg.scenario.model_copy(update={"M": 2, "N": 3, "K": 2, "T": 6}),
            "agent": cfg.agent.model_copy(
                update={"hidden_layers": [8, 8], "batch_size": 4, "learning_start": 4, "greedy_n_mc": 20}
            ),
            "baseline": cfg.baseline.model_copy(update={"iterations": 2, "candidates_per_iter": 2}),
            "run": cfg.run.model_copy(
                update={"episodes": 2, "n_mc": 50, "n_list": [2, 4], "output_dir": str(tmp_path / "out")}
            ),
        }
    )


@pytest.fixture(autouse=True)
def _isolated_registry(monkeypatch):
    monkeypatch.delenv("RISDRL_DB", raising=False)
