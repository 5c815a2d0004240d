# Standard imports
import logging
import os
import re

import networkx as nx
import osmium

from travel_od.network.elements import BoundingBox, Link, Node, RoadNetwork, node_sort_key
from travel_od.utils.config import section
from travel_od.utils.errors import DomainValueError, EmptyNetworkError, NetworkParseError
from travel_od.utils.geodesy import haversine_m
from travel_od.utils.logs import quality_logger

logger = logging.getLogger(__name__)

ONEWAY_FORWARD = ('yes', 'true', '1')
ONEWAY_REVERSE = ('-1', 'reverse')
IMPLIED_ONEWAY_CLASSES = ('motorway',)

MPH_TO_KMH = 1.609344


def parse_speed(tag_value):
    # maxspeed values look like "50", "50 km/h" or "30 mph"
    if tag_value is None:
        return None

    match = re.match(r'^\s*([0-9]+(?:\.[0-9]+)?)\s*(km/h|kmh|kph|mph)?\s*$', str(tag_value))
    if match is None:
        return None

    speed = float(match.group(1))
    if match.group(2) == 'mph':
        speed = speed * MPH_TO_KMH

    return speed if speed > 0 else None


def parse_lanes(tag_value):
    try:
        lanes = int(float(str(tag_value).split(';')[0]))
    except (TypeError, ValueError):
        return None

    return lanes if lanes > 0 else None


class OsmExtractReader(osmium.SimpleHandler):
    """Collects node locations inside the box and every way with its tags."""

    def __init__(self, bbox):
        super().__init__()
        self.bbox = bbox
        self.nodes = {}
        self.ways = []

    def node(self, n):
        if not n.location.valid():
            raise NetworkParseError("Node {} carries no valid location".format(n.id))

        lat, lon = n.location.lat, n.location.lon
        if self.bbox.contains(lat, lon):
            self.nodes[str(n.id)] = (lat, lon)

    def way(self, w):
        # Tag and ref views are only valid inside the callback
        tags = {tag.k: tag.v for tag in w.tags}
        refs = [str(nd.ref) for nd in w.nodes]
        self.ways.append((str(w.id), tags, refs))

    def read(self, document):
        try:
            if hasattr(document, 'read'):
                document = document.read()
            if isinstance(document, bytes):
                self.apply_buffer(document, 'osm')
            elif isinstance(document, str) and document.lstrip().startswith('<'):
                self.apply_buffer(document.encode('utf-8'), 'osm')
            else:
                if not os.path.isfile(str(document)):
                    raise NetworkParseError("Road network extract {} does not exist".format(document))
                self.apply_file(str(document))
        except RuntimeError as exc:
            raise NetworkParseError("Malformed road network extract: {}".format(exc)) from exc

        return self.nodes, self.ways


class OsmNetworkBuilder(object):
    def __init__(self, cfg = None):
        self.cfg = section(cfg, 'network')

        self.road_classes = self.cfg.road_classes
        self.default_lanes = int(self.cfg.default_lanes)

    def _road_class(self, highway, kept_classes):
        # Link roads (primary_link, ...) share the parent class defaults
        road_class = highway[:-len('_link')] if highway.endswith('_link') else highway
        if road_class in kept_classes and road_class in self.road_classes:
            return road_class

        return None

    def _directions(self, tags, road_class):
        oneway = str(tags.get('oneway', '')).lower()
        if oneway in ONEWAY_REVERSE:
            return False, True
        if oneway in ONEWAY_FORWARD:
            return True, False
        if oneway == 'no':
            return True, True
        if road_class in IMPLIED_ONEWAY_CLASSES or tags.get('junction') == 'roundabout':
            return True, False

        return True, True

    def _lanes(self, tags, forward, backward):
        total = parse_lanes(tags.get('lanes'))
        lanes_forward = parse_lanes(tags.get('lanes:forward'))
        lanes_backward = parse_lanes(tags.get('lanes:backward'))

        if forward and backward:
            split = max(1, total // 2) if total is not None else self.default_lanes
            return lanes_forward or split, lanes_backward or split

        single = total if total is not None else self.default_lanes
        return (lanes_forward or single), (lanes_backward or single)

    def _runs(self, refs, nodes):
        # Splitting a way wherever it leaves the bounding box
        runs, current = [], []
        for ref in refs:
            if ref in nodes:
                current.append(ref)
            else:
                if len(current) > 1:
                    runs.append(current)
                current = []
        if len(current) > 1:
            runs.append(current)

        return runs

    def build(self, document, bbox, mode):
        if mode not in self.cfg.modes:
            raise DomainValueError("Unknown network mode {}".format(mode))

        kept_classes = list(self.cfg.modes[mode])
        nodes, ways = OsmExtractReader(bbox).read(document)

        # Drivable ways within the box
        drivable = []
        for way_id, tags, refs in ways:
            highway = tags.get('highway')
            if highway is None:
                continue
            road_class = self._road_class(highway, kept_classes)
            if road_class is None:
                continue
            for run in self._runs(refs, nodes):
                drivable.append((way_id, tags, road_class, run))

        if len(drivable) == 0:
            raise EmptyNetworkError("No drivable ways inside {}".format(bbox))

        # Junctions are shared nodes and run endpoints, everything else is shape
        usage = {}
        for _, _, _, run in drivable:
            for ref in run:
                usage[ref] = usage.get(ref, 0) + 1

        links = []
        dropped = 0
        # Segment numbers continue across the runs of one way so link ids stay unique
        next_segment = {}
        for way_id, tags, road_class, run in drivable:
            forward, backward = self._directions(tags, road_class)
            lanes_forward, lanes_backward = self._lanes(tags, forward, backward)

            class_defaults = self.road_classes[road_class]
            speed_kmh = parse_speed(tags.get('maxspeed')) or float(class_defaults.speed)
            per_lane = float(class_defaults.capacity_per_lane)

            start, length, segment = run[0], 0.0, next_segment.get(way_id, 0)
            for previous, current in zip(run[:-1], run[1:]):
                length += float(haversine_m(nodes[previous][0], nodes[previous][1], nodes[current][0], nodes[current][1]))

                is_junction = usage[current] > 1 or current == run[-1]
                if not is_junction:
                    continue

                if start == current or length <= 0.0:
                    dropped += 1
                else:
                    free_flow_time = length / (speed_kmh / 3.6)
                    if forward:
                        links.append(Link('{}-{}-f'.format(way_id, segment), start, current, length,
                            free_flow_time, per_lane * lanes_forward, road_class))
                    if backward:
                        links.append(Link('{}-{}-b'.format(way_id, segment), current, start, length,
                            free_flow_time, per_lane * lanes_backward, road_class))
                    segment += 1

                start, length = current, 0.0

            next_segment[way_id] = segment

        if dropped > 0:
            logger.info("Dropped %d self loops or zero length segments", dropped)

        if len(links) == 0:
            raise EmptyNetworkError("No usable links inside {}".format(bbox))

        return self._largest_component(nodes, links, mode, bbox)

    def _largest_component(self, nodes, links, mode, bbox):
        graph = nx.DiGraph()
        graph.add_edges_from((link.from_node, link.to_node) for link in links)

        # Largest component wins, ties go to the one holding the smallest node id
        components = sorted(nx.weakly_connected_components(graph),
            key = lambda component: (-len(component), min(node_sort_key(node) for node in component)))
        kept = components[0]

        if len(components) > 1:
            quality_logger.warning("Discarded %d disconnected fragments (%d nodes)",
                len(components) - 1, sum(len(component) for component in components[1:]))

        kept_nodes = sorted(kept, key = node_sort_key)
        kept_links = [link for link in links if link.from_node in kept]

        network = RoadNetwork(
            nodes = tuple(Node(node_id, nodes[node_id][0], nodes[node_id][1]) for node_id in kept_nodes),
            links = tuple(kept_links),
            mode = mode,
            bbox = bbox
        )
        logger.info("Built %s network with %d nodes and %d links", mode, len(network.nodes), len(network.links))

        return network


def parse_network(document, bbox, mode = 'city', cfg = None):
    if not isinstance(bbox, BoundingBox):
        bbox = BoundingBox(*bbox)

    return OsmNetworkBuilder(cfg).build(document, bbox, mode)
