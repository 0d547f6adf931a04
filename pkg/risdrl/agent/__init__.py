"""
DDPG agent: state/action encoding, replay memory and the learner.
"""

from .ddpg import MlpActionValue, TrainingResult, extract_greedy_tx, train
from .encoding import StateScale, apply_action, decode_state, encode_state, reset_tx
from .replay import Experience, ReplayBuffer

__all__ = [
    "Experience",
    "MlpActionValue",
    "ReplayBuffer",
    "StateScale",
    "TrainingResult",
    "apply_action",
    "decode_state",
    "encode_state",
    "extract_greedy_tx",
    "reset_tx",
    "train",
]
