# Standard imports
import logging
from dataclasses import dataclass

import numpy as np

from travel_od.assign_core.equilibrium import user_equilibrium
from travel_od.assign_core.od_matrix import ODMatrix
from travel_od.assign_core.shortest_path import DEFAULT_CONNECTOR_TIME, AssignmentGraph
from travel_od.assign_core.vdf import VdfParams
from travel_od.ingest.panel import as_date, check_slot
from travel_od.utils.errors import EstimationError, ReachabilityError

logger = logging.getLogger(__name__)


@dataclass(frozen = True, order = True)
class FitnessValue:
    total: float
    rmse: float
    penalty: float = 0.0

    @classmethod
    def worst(cls):
        return cls(np.inf, np.inf, 0.0)

    @property
    def feasible(self):
        return bool(np.isfinite(self.total))


def observed_times(panel, date, slot):
    """Observed travel time per link for one (date, slot) snapshot."""
    rows = panel.select(slot = check_slot(slot, allow_whole_day = False), start = as_date(date), end = as_date(date))
    return dict(zip(rows['link_id'], rows['travel_time_s'].astype(float)))


class FitnessEvaluator(object):
    """Normalized link time error of the equilibrium loading of a chromosome."""

    def __init__(self, network, zones, observed, params = None, tol = 1e-3, max_iter = 40, connector_time = DEFAULT_CONNECTOR_TIME):
        self.network = network
        self.zones = zones
        self.params = params or VdfParams()
        self.tol = float(tol)
        self.max_iter = int(max_iter)
        self.connector_time = float(connector_time)

        link_ids = sorted(link_id for link_id in observed if network.has_link(link_id))
        if len(link_ids) == 0:
            raise EstimationError("Observed times cover no link of the network")

        skipped = len(observed) - len(link_ids)
        if skipped > 0:
            logger.debug("%d observed links are not part of the network", skipped)

        self.link_ids = link_ids
        self.positions = np.array([network.link_index[link_id] for link_id in link_ids], dtype = np.int64)
        self.observed = np.array([float(observed[link_id]) for link_id in link_ids])
        self.free_flow = network.arrays['free_flow_time'][self.positions]
        self.graph = AssignmentGraph(network, zones, self.connector_time)

    def decode(self, chromosome):
        # Clipping keeps every chromosome a valid matrix
        return ODMatrix.from_cells(self.zones, np.clip(np.asarray(chromosome, dtype = float), 0.0, None))

    def assigned_times(self, od):
        result = user_equilibrium(self.network, od, self.params, self.tol, self.max_iter, self.connector_time,
            workers = 1, graph = self.graph)
        return result.times[self.positions]

    def __call__(self, chromosome):
        od = self.decode(chromosome)
        try:
            assigned = self.assigned_times(od)
        except ReachabilityError as exc:
            logger.warning("Chromosome assigned worst fitness: %s", exc)
            return FitnessValue.worst()

        residuals = (assigned - self.observed) / self.free_flow
        rmse = float(np.sqrt(np.mean(residuals ** 2)))

        return FitnessValue(total = rmse, rmse = rmse, penalty = 0.0)


def fitness(chromosome, network, zones, observed, params = None, tol = 1e-3, max_iter = 40, connector_time = DEFAULT_CONNECTOR_TIME):
    return FitnessEvaluator(network, zones, observed, params, tol, max_iter, connector_time)(chromosome)
