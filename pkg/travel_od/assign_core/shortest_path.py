"""Label-setting shortest paths and all-or-nothing loading.

Zones enter the graph as virtual nodes appended after the road nodes. Each
zone node is tied to its centroid by a pair of virtual connector links with a
fixed crossing time, so demand always enters and leaves through the centroid
and no path can pass through a zone.
"""

# Standard imports
import logging
from dataclasses import dataclass, field
from heapq import heappop, heappush
from typing import Dict

import numpy as np

from travel_od.network.elements import node_sort_key
from travel_od.utils.errors import DomainValueError, ReachabilityError

logger = logging.getLogger(__name__)

DEFAULT_CONNECTOR_TIME = 10.0


class AssignmentGraph(object):
    def __init__(self, network, zones = None, connector_time = DEFAULT_CONNECTOR_TIME):
        if not connector_time > 0:
            raise DomainValueError("Connector time must be positive, got {}".format(connector_time))

        self.network = network
        self.zones = zones
        self.connector_time = float(connector_time)

        arrays = network.arrays
        self.n_links = len(network.links)
        self.n_real_nodes = len(network.nodes)
        self.n_zones = 0 if zones is None else len(zones)
        self.n_nodes = self.n_real_nodes + self.n_zones

        tails = list(arrays['from'].tolist())
        heads = list(arrays['to'].tolist())
        self.zone_nodes = []
        for zone_idx, zone in enumerate(zones.zones if zones is not None else ()):
            zone_node = self.n_real_nodes + zone_idx
            centroid = network.node_index[zone.centroid]
            tails.extend([zone_node, centroid])
            heads.extend([centroid, zone_node])
            self.zone_nodes.append(zone_node)

        self.tail_list = tails
        self.tails = np.array(tails, dtype = np.int64)
        self.heads = np.array(heads, dtype = np.int64)

        # Tie-break rank of every node: road nodes by id, zone nodes after them
        order = sorted(range(self.n_real_nodes), key = lambda idx: node_sort_key(network.nodes[idx].id))
        rank = [0] * self.n_nodes
        for position, idx in enumerate(order):
            rank[idx] = position
        for zone_idx in range(self.n_zones):
            rank[self.n_real_nodes + zone_idx] = self.n_real_nodes + zone_idx
        self.rank = rank

        # Outgoing (head, link) pairs per node, in link order
        self.out = [[] for _ in range(self.n_nodes)]
        for link_idx, (tail, head) in enumerate(zip(tails, heads)):
            self.out[tail].append((head, link_idx))

    def full_times(self, times):
        # Road link times followed by the fixed connector times
        times = np.asarray(times, dtype = float)
        connectors = np.full(2 * self.n_zones, self.connector_time)
        return np.concatenate([times, connectors])

    def tree(self, times, source):
        """Returns (cost, predecessor link, settle order) from one source node.

        Equal-cost labels keep the predecessor whose tail has the smaller node
        rank, then the smaller link index.
        """
        times = times.tolist() if isinstance(times, np.ndarray) else list(times)
        tails = self.tail_list
        rank = self.rank

        cost = [np.inf] * self.n_nodes
        pred = [-1] * self.n_nodes
        settled = [False] * self.n_nodes
        order = []

        cost[source] = 0.0
        heap = [(0.0, rank[source], source)]
        while heap:
            dist, _, node = heappop(heap)
            if settled[node]:
                continue
            settled[node] = True
            order.append(node)

            for head, link_idx in self.out[node]:
                if settled[head]:
                    continue

                candidate = dist + times[link_idx]
                if candidate < cost[head]:
                    cost[head] = candidate
                    pred[head] = link_idx
                    heappush(heap, (candidate, rank[head], head))
                elif candidate == cost[head]:
                    current_tail = tails[pred[head]]
                    if (rank[node], link_idx) < (rank[current_tail], pred[head]):
                        pred[head] = link_idx

        return cost, pred, order

    def origin_loads(self, full, origin_idx, demand_row, with_destinations = False):
        """Loads one origin's demand row onto its shortest path tree.

        `full` holds road and connector times as returned by `full_times`.
        Returns (road link loads, shortest path travel time sum, unreachable
        destination index or None, per destination road link loads or None).
        """
        source = self.zone_nodes[origin_idx]
        cost, pred, order = self.tree(full, source)

        node_load = np.zeros(self.n_nodes)
        sptt = 0.0
        for dest_idx, trips in enumerate(demand_row):
            if trips <= 0 or dest_idx == origin_idx:
                continue

            dest_node = self.zone_nodes[dest_idx]
            if not np.isfinite(cost[dest_node]):
                return None, 0.0, dest_idx, None

            node_load[dest_node] += trips
            sptt += trips * cost[dest_node]

        # Pushing loads back toward the origin in reverse settle order
        link_load = np.zeros(len(full))
        for node in reversed(order):
            link_idx = pred[node]
            if link_idx < 0 or node_load[node] == 0:
                continue
            link_load[link_idx] += node_load[node]
            node_load[self.tail_list[link_idx]] += node_load[node]

        dest_loads = None
        if with_destinations:
            dest_loads = np.zeros((self.n_zones, self.n_links))
            for dest_idx, trips in enumerate(demand_row):
                if trips <= 0 or dest_idx == origin_idx:
                    continue

                node = self.zone_nodes[dest_idx]
                while pred[node] >= 0:
                    link_idx = pred[node]
                    if link_idx < self.n_links:
                        dest_loads[dest_idx, link_idx] += trips
                    node = self.tail_list[link_idx]

        return link_load[:self.n_links], sptt, None, dest_loads


@dataclass(frozen = True)
class ShortestPathTree:
    origin: str
    cost: Dict[str, float]
    predecessor: Dict[str, str]
    link_tails: Dict[str, str] = field(default_factory = dict, repr = False)

    def reachable(self, node_id):
        return node_id in self.cost

    def path_links(self, node_id):
        if node_id not in self.cost:
            return None

        links = []
        while node_id in self.predecessor:
            link_id = self.predecessor[node_id]
            links.append(link_id)
            node_id = self.link_tails[link_id]

        return links[::-1]


def shortest_path_tree(network, times, origin):
    """Least-cost tree over the road links from a zone centroid or node id.

    Unreachable nodes are absent from `cost`.
    """
    times = np.asarray(times, dtype = float)
    if len(times) != len(network.links) or not np.all(times > 0):
        raise DomainValueError("Shortest paths need one positive time per link")

    origin_node = origin.centroid if hasattr(origin, 'centroid') else origin
    graph = AssignmentGraph(network)
    cost, pred, _ = graph.tree(times, network.node_index[origin_node])

    node_ids = [node.id for node in network.nodes]
    tree = ShortestPathTree(
        origin = origin_node,
        cost = {node_ids[idx]: value for idx, value in enumerate(cost) if np.isfinite(value)},
        predecessor = {node_ids[idx]: network.links[link_idx].id for idx, link_idx in enumerate(pred) if link_idx >= 0},
        link_tails = {link.id: link.from_node for link in network.links}
    )

    return tree


def load_origins(graph, times, demand, origins, with_destinations = False):
    # Per origin results in the order given, summed by the caller
    full = graph.full_times(times).tolist()
    results = []
    for origin_idx in origins:
        results.append(graph.origin_loads(full, origin_idx, demand[origin_idx], with_destinations))

    return results


def reduce_loads(graph, results, origins):
    """Sums per origin loads in origin order, raising on unreachable pairs."""
    flows = np.zeros(graph.n_links)
    sptt = 0.0
    dest_flows = None
    for origin_idx, (link_load, origin_sptt, unreachable, dest_loads) in zip(origins, results):
        if unreachable is not None:
            zone_ids = graph.zones.ids
            raise ReachabilityError(zone_ids[origin_idx], zone_ids[unreachable])

        flows += link_load
        sptt += origin_sptt
        if dest_loads is not None:
            dest_flows = dest_loads if dest_flows is None else dest_flows + dest_loads

    return flows, sptt, dest_flows


def all_or_nothing(network, od, times, connector_time = DEFAULT_CONNECTOR_TIME, graph = None):
    """Loads each OD pair's demand onto its current least-cost path."""
    graph = graph or AssignmentGraph(network, od.zones, connector_time)
    origins = [idx for idx in range(len(od.zones)) if od.demand[idx].sum() > 0]

    results = load_origins(graph, np.asarray(times, dtype = float), od.demand, origins)
    flows, _, _ = reduce_loads(graph, results, origins)

    return flows
