from .network import (
    N_ACTIONS,
    OBS_DIM,
    QNetwork,
    TrainingError,
    decode_joint,
    encode_joint,
    forward,
    select_action,
    sgd_step,
    td_target,
)
from .replay import PrioritizedReplayBuffer, Transition
from .training import TrainConfig, TrainMetrics, epsilon_at, train
from .weights import WeightFileError, load_weights, save_weights
