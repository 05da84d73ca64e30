from .pointfile import load_points, load_labels, load_frame, write_points, write_labels
from .maskfile import read_mask, write_mask
from .exporter import write_colored, read_ply
from .datareader import pair_frames, wads_frames
from .synth import SynthSpec, generate_synthetic
