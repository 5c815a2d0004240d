# Standard imports
import logging
from dataclasses import dataclass

import numpy as np

from travel_od.utils.errors import UndefinedStatsError

logger = logging.getLogger(__name__)


@dataclass(frozen = True)
class NetworkStats:
    avg_trip_length: float
    avg_travel_time: float
    total_demand: float

    def as_dict(self):
        return {'avg_trip_length_m': self.avg_trip_length, 'avg_travel_time_s': self.avg_travel_time, 'total_demand': self.total_demand}


def network_stats(result, od, network):
    """Demand weighted trip length and travel time over the road links."""
    total = od.total
    if not total > 0:
        raise UndefinedStatsError("Network statistics need a positive total demand")

    if not result.converged:
        logger.warning("Statistics taken from an assignment that stopped at relative gap %.3e", result.relative_gap)

    lengths = network.arrays['length']
    return NetworkStats(
        avg_trip_length = float(np.dot(result.flows, lengths) / total),
        avg_travel_time = float(np.dot(result.flows, result.times) / total),
        total_demand = total
    )
