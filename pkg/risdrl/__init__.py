"""
risdrl package: long-term-CSI precoding and RIS phase design with a numpy DDPG agent.
"""

from .channel import LongTermCsi, ChannelRealization, OfflineDataset
from .rates import TxConfig

__all__ = ["ChannelRealization", "LongTermCsi", "OfflineDataset", "TxConfig"]
