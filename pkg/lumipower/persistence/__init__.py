from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
