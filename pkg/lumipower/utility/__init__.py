from .load_config import *
