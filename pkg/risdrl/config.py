"""
Application-wide configuration defaults.
"""

from __future__ import annotations

from pathlib import Path

APP_NAME = "RIS Long-Term CSI DDPG"
APP_VERSION = "1.0.0"
DEFAULT_OUTPUT_DIR = Path("runs")
DB_FILENAME = "runs.sqlite3"
MANIFEST_FILENAME = "manifest.toml"
DB_ENV_VAR = "RISDRL_DB"

# Numerical tolerances shared by the constraint checks.
POWER_TOLERANCE = 1e-9
MODULUS_TOLERANCE = 1e-12
DEGENERATE_PRECODER_NORM = 1e-12

# Monte-Carlo draws are generated in chunks to bound memory.
MC_CHUNK_SIZE = 4096

# Network defaults.
HIDDEN_LAYERS = (256, 256)
ACTOR_LEARNING_RATE = 1e-4
CRITIC_LEARNING_RATE = 1e-3
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPSILON = 1e-8
ACTOR_FINAL_LAYER_SCALE = 1e-3

# Agent defaults.
DISCOUNT = 0.99
REPLAY_CAPACITY = 100_000
BATCH_SIZE = 64
SOFT_UPDATE_RATE = 0.005
NOISE_SCALE = 0.1
NOISE_DECAY = 0.9995
LEARNING_START = 1000
SMOOTHING_WEIGHT = 0.9
GREEDY_N_MC = 1000

# Scenario defaults (full scale).
DEFAULT_BS_POSITION = (0.0, 0.0, 30.0)
DEFAULT_RIS_POSITION = (100.0, 20.0, 10.0)
DEFAULT_USER_DISK_CENTER = (150.0, 0.0, 1.5)
DEFAULT_USER_DISK_RADIUS = 20.0
DEFAULT_PL0_DB = -30.0
DEFAULT_D0 = 1.0
ALPHA_BS_RIS = 2.2
ALPHA_RIS_USER = 2.2
ALPHA_BS_USER = 3.5
NOISE_DENSITY_DBM_HZ = -174.0
BANDWIDTH_HZ = 1e6
TRANSMIT_POWER_W = 1.0
