"""
dmnrlab.kernel.registry

Named filters. Every entry maps (cloud, settings) -> Partition, so the CLI and
the evaluator can run any algorithm by name. Extra filters (DSOR, DDIOR, ...)
plug in through ``registry.register``.
"""

from typing import Callable, Dict, List, Optional

from dmnrlab.config.loader import Settings
from dmnrlab.math.structs import Partition, PointCloud
from dmnrlab.toolbox.baselines import dror_baseline, ror_baseline, sor_baseline
from dmnrlab.toolbox.dmnr import dmnr
from dmnrlab.toolbox.rescue import dmnr_h

FilterFunc = Callable[[PointCloud, Settings], Partition]


class FilterEntry:
    def __init__(self, name: str, func: FilterFunc, description: str = ""):
        self.name = name
        self.func = func
        self.description = description

    def bind(self, settings: Settings) -> Callable[[PointCloud], Partition]:
        """Freeze the settings so the result takes a cloud only."""
        func = self.func

        def run(cloud: PointCloud) -> Partition:
            return func(cloud, settings)

        run.__name__ = f"filter_{self.name.replace('-', '_')}"
        return run

    def __repr__(self):
        return f"<FilterEntry name={self.name}>"


class FilterRegistry:
    def __init__(self):
        self._map: Dict[str, FilterEntry] = {}

    def register(self, entry: FilterEntry):
        self._map[entry.name] = entry

    def register_function(self, name: str, func: FilterFunc, description: str = "") -> FilterEntry:
        entry = FilterEntry(name, func, description)
        self._map[name] = entry
        return entry

    def get(self, name: str) -> Optional[FilterEntry]:
        return self._map.get(name)

    def __contains__(self, name: str) -> bool:
        return name in self._map

    def unregister(self, name: str):
        self._map.pop(name, None)

    def names(self) -> List[str]:
        return sorted(self._map)


registry = FilterRegistry()

registry.register_function(
    "dmnr", lambda c, s: dmnr(c, s.dmnr),
    "height retention + dynamic density/intensity/range threshold",
)
registry.register_function(
    "dmnr-h", lambda c, s: dmnr_h(c, s.dmnr, s.hdbscan),
    "DMNR followed by HDBSCAN rescue of the top-h clusters",
)
registry.register_function(
    "sor", lambda c, s: sor_baseline(c, s.sor_k, s.sor_alpha),
    "statistical outlier removal",
)
registry.register_function(
    "ror", lambda c, s: ror_baseline(c, s.ror_radius, s.ror_min_neighbors),
    "radius outlier removal",
)
registry.register_function(
    "dror",
    lambda c, s: dror_baseline(
        c, s.dror_alpha_deg, s.dror_beta, s.dror_min_radius, s.dror_min_neighbors
    ),
    "dynamic radius outlier removal",
)
