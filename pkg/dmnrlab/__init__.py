# Core package init
__version__ = "0.1.0"

from .math.structs import (
    Point, PointCloud, HeightMode, DmnrParams, HdbscanParams,
    Partition, Stage, Verdict,
)
from .toolbox.dmnr import dmnr
from .toolbox.hdbscan import hdbscan
from .toolbox.rescue import dmnr_h, rescue
