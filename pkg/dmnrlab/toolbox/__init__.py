from .dmnr import dmnr, classify, height_params, height_threshold, dynamic_threshold
from .baselines import sor_baseline, ror_baseline, dror_baseline
from .hdbscan import hdbscan, core_distances, ClusterLabeling, NOISE
from .rescue import rescue, rank_clusters, dmnr_h
