# Kept to errors only: registry and evaluator pull in config and toolbox.
from .errors import *  # noqa: F401,F403
