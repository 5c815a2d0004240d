"""Static user equilibrium assignment.

Conjugate Frank-Wolfe descent on the Beckmann objective: every iteration loads
the demand all-or-nothing on the current shortest paths, mixes that loading
with the previous search point so the new direction is conjugate to the last
one under the diagonal Hessian, and moves toward the mix by an exact line
search. The relative gap

    (total system travel time - shortest path travel time) / total system travel time

measures the distance to equilibrium.
"""

# Standard imports
import logging
import multiprocessing
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import brentq

from travel_od.assign_core.shortest_path import DEFAULT_CONNECTOR_TIME, AssignmentGraph, load_origins, reduce_loads
from travel_od.assign_core.vdf import VdfParams, link_time_derivatives, link_times
from travel_od.utils.config import section
from travel_od.utils.errors import DomainValueError, NumericError
from travel_od.utils.tables import write_table

logger = logging.getLogger(__name__)

RESULT_COLUMNS = ['link_id', 'flow', 'time_s']

# Upper bound on the weight of the previous search point
CONJUGATE_CAP = 1.0 - 1e-6

# Graph shared with pool workers through the initializer
_worker_graph = None


def _init_worker(graph):
    global _worker_graph
    _worker_graph = graph


def _worker_loads(times, demand, origins, with_destinations):
    return load_origins(_worker_graph, times, demand, origins, with_destinations)


@dataclass(frozen = True, eq = False)
class AssignmentResult:
    link_ids: Tuple[str, ...]
    flows: np.ndarray
    times: np.ndarray
    relative_gap: float
    iterations: int
    gap_trace: Tuple[float, ...] = ()
    converged: bool = False
    destination_flows: Optional[np.ndarray] = None

    def flow_of(self, link_id):
        return float(self.flows[self.link_ids.index(link_id)])

    def time_of(self, link_id):
        return float(self.times[self.link_ids.index(link_id)])

    def to_frame(self):
        return pd.DataFrame({'link_id': list(self.link_ids), 'flow': self.flows, 'time_s': self.times}, columns = RESULT_COLUMNS)

    def write(self, path):
        return write_table(self.to_frame(), path, RESULT_COLUMNS)


class _Loader(object):
    # All-or-nothing loading, serial or over a worker pool with an ordered reduction
    def __init__(self, graph, demand, workers):
        self.graph = graph
        self.demand = demand
        self.origins = [idx for idx in range(len(demand)) if demand[idx].sum() > 0]
        self.pool = None

        workers = min(int(workers), max(len(self.origins), 1))
        if workers > 1:
            self.pool = multiprocessing.Pool(workers, initializer = _init_worker, initargs = (graph,))
            self.chunks = [list(chunk) for chunk in np.array_split(self.origins, workers) if len(chunk) > 0]

    def load(self, times, with_destinations = False):
        if self.pool is None:
            results = load_origins(self.graph, times, self.demand, self.origins, with_destinations)
        else:
            tasks = [(times, self.demand, [int(idx) for idx in chunk], with_destinations) for chunk in self.chunks]
            results = [item for chunk_results in self.pool.starmap(_worker_loads, tasks) for item in chunk_results]

        return reduce_loads(self.graph, results, self.origins)

    def close(self):
        if self.pool is not None:
            self.pool.close()
            self.pool.join()
            self.pool = None


def _step_size(fft, capacity, params, flows, target):
    # Root of the objective's directional derivative on [0, 1]
    direction = target - flows

    def derivative(step):
        return float(np.dot(direction, link_times(fft, capacity, flows + step * direction, params)))

    low, high = derivative(0.0), derivative(1.0)
    if not (np.isfinite(low) and np.isfinite(high)):
        raise NumericError("Line search hit a non-finite objective slope")
    if low >= 0:
        return 0.0
    if high <= 0:
        return 1.0

    return float(brentq(derivative, 0.0, 1.0, xtol = 1e-12, rtol = 1e-12))


def _conjugate_weight(fft, capacity, params, flows, target, previous):
    # Weight of the previous search point in the new one, 0 falls back to plain Frank-Wolfe
    hessian = link_time_derivatives(fft, capacity, flows, params)
    towards_previous = hessian * (previous - flows)

    numerator = float(np.dot(towards_previous, target - flows))
    denominator = float(np.dot(towards_previous, target - previous))
    if denominator == 0.0:
        return 0.0

    weight = numerator / denominator
    if not np.isfinite(weight) or weight < 0.0:
        return 0.0

    return min(weight, CONJUGATE_CAP)


def user_equilibrium(network, od, params = None, tol = 1e-4, max_iter = 200,
                     connector_time = DEFAULT_CONNECTOR_TIME, workers = 1, destination_flows = False, graph = None):
    """Solves the static user equilibrium for one OD matrix.

    The returned flows belong to the iterate with the lowest relative gap,
    so `gap_trace` checkpoints of the best gap never increase. A prebuilt
    `graph` for the same zones can be passed in to skip the graph setup.
    """
    params = params or VdfParams()
    if not tol > 0:
        raise DomainValueError("Gap tolerance must be positive, got {}".format(tol))
    if int(max_iter) < 1:
        raise DomainValueError("max_iter must be at least 1, got {}".format(max_iter))

    arrays = network.arrays
    fft = arrays['free_flow_time']
    capacity = arrays['capacity']
    link_ids = tuple(link.id for link in network.links)

    if od.total == 0:
        return AssignmentResult(link_ids, np.zeros(len(fft)), fft.copy(), 0.0, 0, (0.0,), True,
            np.zeros((len(od.zones), len(fft))) if destination_flows else None)

    graph = graph or AssignmentGraph(network, od.zones, connector_time)
    connector_total = 2.0 * graph.connector_time * od.total
    loader = _Loader(graph, od.demand, workers)

    try:
        # Destination flows follow the same convex steps as the totals
        flows, _, by_dest = loader.load(fft, destination_flows)

        best = None
        trace = []
        converged = False
        previous = None
        for iteration in range(1, int(max_iter) + 1):
            times = link_times(fft, capacity, flows, params)
            target, sptt, target_by_dest = loader.load(times, destination_flows)

            tstt = float(np.dot(flows, times)) + connector_total
            if not (np.isfinite(tstt) and np.isfinite(sptt)):
                raise NumericError("Non-finite system travel time at iteration {}".format(iteration))

            gap = max((tstt - sptt) / tstt, 0.0)
            if best is None or gap < best[0]:
                best = (gap, flows.copy(), times, by_dest)
            trace.append(best[0])
            logger.debug("Iteration %d relative gap %.3e", iteration, gap)

            if gap <= tol:
                converged = True
                break

            weight = 0.0
            if previous is not None:
                weight = _conjugate_weight(fft, capacity, params, flows, target, previous[0])

            point, point_by_dest = target, target_by_dest
            if weight > 0.0:
                point = weight * previous[0] + (1.0 - weight) * target
                if destination_flows:
                    point_by_dest = weight * previous[1] + (1.0 - weight) * target_by_dest

            step = _step_size(fft, capacity, params, flows, point)
            if step == 0.0 and weight > 0.0:
                # No progress along the conjugate direction, restart from the plain one
                point, point_by_dest = target, target_by_dest
                step = _step_size(fft, capacity, params, flows, point)

            flows = flows + step * (point - flows)
            if destination_flows:
                by_dest = by_dest + step * (point_by_dest - by_dest)
            previous = (point, point_by_dest)
    finally:
        loader.close()

    gap, flows, times, by_dest = best
    logger.info("Equilibrium %s after %d iterations, relative gap %.3e",
        'converged' if converged else 'stopped', len(trace), gap)

    return AssignmentResult(link_ids, flows, times, float(gap), len(trace), tuple(trace), converged, by_dest)


class UserEquilibriumSolver(object):
    def __init__(self, cfg = None, workers = 1):
        # Importing the assignment section of the configs
        self.cfg = section(cfg, 'assign')

        self.params = VdfParams.from_config(self.cfg.vdf)
        self.tolerance = float(self.cfg.tolerance)
        self.max_iter = int(self.cfg.max_iter)
        self.connector_time = float(self.cfg.connector_time)
        self.workers = int(workers)

    def solve(self, network, od, destination_flows = False):
        return user_equilibrium(
            network, od,
            params = self.params,
            tol = self.tolerance,
            max_iter = self.max_iter,
            connector_time = self.connector_time,
            workers = self.workers,
            destination_flows = destination_flows
        )
