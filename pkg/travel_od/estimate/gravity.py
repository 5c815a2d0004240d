# Standard imports
import logging

import numpy as np
from scipy.optimize import minimize_scalar

from travel_od.assign_core.od_matrix import ODMatrix
from travel_od.assign_core.shortest_path import DEFAULT_CONNECTOR_TIME, AssignmentGraph
from travel_od.utils.errors import EstimationError

logger = logging.getLogger(__name__)

# Stand in for the infinite error of matrices with unreachable demand
UNREACHABLE_ERROR = 1e12


def connector_capacities(network, zones):
    # Productions from the capacity leaving each centroid, attractions from the capacity entering it
    productions = np.zeros(len(zones))
    attractions = np.zeros(len(zones))
    for idx, zone in enumerate(zones.zones):
        for link_id in zone.connectors:
            link = network.link(link_id)
            if link.from_node == zone.centroid:
                productions[idx] += link.capacity
            if link.to_node == zone.centroid:
                attractions[idx] += link.capacity

    return productions, attractions


def free_flow_impedance(network, zones, connector_time = DEFAULT_CONNECTOR_TIME):
    graph = AssignmentGraph(network, zones, connector_time)
    full = graph.full_times(network.arrays['free_flow_time']).tolist()

    impedance = np.full((len(zones), len(zones)), np.inf)
    for origin_idx, source in enumerate(graph.zone_nodes):
        cost, _, _ = graph.tree(full, source)
        for dest_idx, dest_node in enumerate(graph.zone_nodes):
            if dest_idx != origin_idx:
                impedance[origin_idx, dest_idx] = cost[dest_node]

    return impedance


def gravity_seed(network, zones, total, exponent = 2.0, connector_time = DEFAULT_CONNECTOR_TIME):
    """Production constrained gravity matrix scaled to `total` trips.

    Deterrence is a power of the free flow travel time between centroids;
    unreachable pairs get no trips.
    """
    productions, attractions = connector_capacities(network, zones)
    impedance = free_flow_impedance(network, zones, connector_time)

    deterrence = np.zeros_like(impedance)
    finite = np.isfinite(impedance)
    deterrence[finite] = np.power(impedance[finite], -float(exponent))

    weights = attractions[np.newaxis, :] * deterrence
    row_sums = weights.sum(axis = 1, keepdims = True)
    demand = np.divide(productions[:, np.newaxis] * weights, row_sums, out = np.zeros_like(weights), where = row_sums > 0)

    if not demand.sum() > 0:
        raise EstimationError("Gravity model produced no trips, zones may be disconnected")

    demand *= float(total) / demand.sum()
    return ODMatrix(zones, demand)


def seed_population(network, zones, size, seed, cfg, connector_time = DEFAULT_CONNECTOR_TIME, anchor_total = None):
    """Initial chromosomes, one random stream per member.

    Member totals are log-uniform between `min_scale` and `max_scale` times the
    summed connector capacity, and every cell carries log-normal noise. With an
    `anchor_total` the totals are drawn within a factor `anchor_spread` of it
    instead, and member 0 is the noise free gravity matrix at that total.
    """
    shape = gravity_seed(network, zones, 1.0, cfg.exponent, connector_time).cells()
    if anchor_total is not None:
        low, high = np.log(anchor_total / cfg.anchor_spread), np.log(anchor_total * cfg.anchor_spread)
    else:
        capacity_total = float(connector_capacities(network, zones)[0].sum())
        low, high = np.log(cfg.min_scale * capacity_total), np.log(cfg.max_scale * capacity_total)

    population = []
    for index in range(size):
        if index == 0 and anchor_total is not None:
            population.append(shape * anchor_total)
            continue

        rng = np.random.default_rng([seed, 0, index])
        total = np.exp(rng.uniform(low, high))
        noise = np.exp(rng.normal(0.0, cfg.noise, len(shape)))
        population.append(shape * total * noise)

    logger.debug("Seeded %d chromosomes between %.1f and %.1f trips", size, np.exp(low), np.exp(high))

    return population


def anchor_total(evaluator, network, zones, cfg, connector_time = DEFAULT_CONNECTOR_TIME):
    """Total demand at which the gravity shape best reproduces the observed times.

    A bounded scalar search in log space between `min_scale` and `max_scale`
    times the summed connector capacity.
    """
    shape = gravity_seed(network, zones, 1.0, cfg.exponent, connector_time).cells()
    capacity_total = float(connector_capacities(network, zones)[0].sum())
    bounds = (np.log(cfg.min_scale * capacity_total), np.log(cfg.max_scale * capacity_total))

    def error(log_total):
        value = evaluator(shape * np.exp(log_total)).total
        return value if np.isfinite(value) else UNREACHABLE_ERROR

    result = minimize_scalar(error, bounds = bounds, method = 'bounded', options = {'xatol': 1e-3})
    total = float(np.exp(result.x))
    logger.info("Gravity shape fits the observations best at %.1f trips, rmse %.4f", total, float(result.fun))

    return total
