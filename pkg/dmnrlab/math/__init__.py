from .structs import (
    Point, PointCloud, HeightMode, DmnrParams, HdbscanParams,
    Partition, Stage, Verdict,
)
from .geometry import sensor_distance, sensor_distances, planar_ranges
from .spatial import SpatialIndex, DensityProfile, build_index, knn_distances, knn_mean_distance, density_profile
from .statistics import Confusion, confusion, harmonic_f1, precision_recall_f1
