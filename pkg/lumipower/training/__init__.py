from .config import TrainConfig
from .loss import mse_loss
from .optimizer import SGD, SGDState, sgd_step
from .trainer import TrainReport, TrainResult, Trainer, initial_model, predict, train
