from .defaults import apply, DMNR_DEFAULTS, HDBSCAN_DEFAULTS, BASELINE_DEFAULTS
from .loader import Settings, build_settings, load_config, read_key_values
