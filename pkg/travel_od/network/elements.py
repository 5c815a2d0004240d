"""Road network and zoning domain types.

Networks and zone sets are immutable once built. Index lookups are cached on
first access so they can be shared between readers without locking.
"""

# Standard imports
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Optional, Tuple

import numpy as np

from travel_od.utils.errors import DomainValueError

MODES = ('city', 'highway')


def node_sort_key(node_id):
    # OSM ids are numeric strings, compare them as numbers when possible
    text = str(node_id)
    return (0, int(text), text) if text.isdigit() else (1, 0, text)


@dataclass(frozen = True)
class BoundingBox:
    min_lon: float
    min_lat: float
    max_lon: float
    max_lat: float

    def __post_init__(self):
        if not (self.min_lon < self.max_lon and self.min_lat < self.max_lat):
            raise DomainValueError("Degenerate bounding box {}".format(self))

    @classmethod
    def from_config(cls, cfg):
        return cls(float(cfg.min_lon), float(cfg.min_lat), float(cfg.max_lon), float(cfg.max_lat))

    def contains(self, lat, lon):
        return self.min_lat <= lat <= self.max_lat and self.min_lon <= lon <= self.max_lon

    def as_dict(self):
        return {'min_lon': self.min_lon, 'min_lat': self.min_lat, 'max_lon': self.max_lon, 'max_lat': self.max_lat}


@dataclass(frozen = True)
class Node:
    id: str
    lat: float
    lon: float

    def __post_init__(self):
        if not -90.0 <= self.lat <= 90.0:
            raise DomainValueError("Node {} latitude {} out of range".format(self.id, self.lat))
        if not -180.0 <= self.lon <= 180.0:
            raise DomainValueError("Node {} longitude {} out of range".format(self.id, self.lon))


@dataclass(frozen = True)
class Link:
    id: str
    from_node: str
    to_node: str
    length: float
    free_flow_time: float
    capacity: float
    road_class: str

    def __post_init__(self):
        if not self.length > 0:
            raise DomainValueError("Link {} needs a positive length".format(self.id))
        if not self.free_flow_time > 0:
            raise DomainValueError("Link {} needs a positive free flow time".format(self.id))
        if not self.capacity > 0:
            raise DomainValueError("Link {} needs a positive capacity".format(self.id))
        if self.from_node == self.to_node:
            raise DomainValueError("Link {} is a self loop".format(self.id))


@dataclass(frozen = True)
class RoadNetwork:
    nodes: Tuple[Node, ...]
    links: Tuple[Link, ...]
    mode: str = 'city'
    bbox: Optional[BoundingBox] = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise DomainValueError("Unknown network mode {}".format(self.mode))

        node_ids = set()
        for node in self.nodes:
            if node.id in node_ids:
                raise DomainValueError("Duplicate node id {}".format(node.id))
            node_ids.add(node.id)

        link_ids = set()
        for link in self.links:
            if link.id in link_ids:
                raise DomainValueError("Duplicate link id {}".format(link.id))
            if link.from_node not in node_ids or link.to_node not in node_ids:
                raise DomainValueError("Link {} has an endpoint outside the network".format(link.id))
            link_ids.add(link.id)

    @cached_property
    def node_index(self) -> Dict[str, int]:
        return {node.id: idx for idx, node in enumerate(self.nodes)}

    @cached_property
    def link_index(self) -> Dict[str, int]:
        return {link.id: idx for idx, link in enumerate(self.links)}

    @cached_property
    def links_by_id(self) -> Dict[str, Link]:
        return {link.id: link for link in self.links}

    @cached_property
    def nodes_by_id(self) -> Dict[str, Node]:
        return {node.id: node for node in self.nodes}

    @cached_property
    def arrays(self):
        # Column arrays in link order, used by the assignment and metrics kernels
        return {
            'from': np.array([self.node_index[link.from_node] for link in self.links], dtype = np.int64),
            'to': np.array([self.node_index[link.to_node] for link in self.links], dtype = np.int64),
            'length': np.array([link.length for link in self.links], dtype = float),
            'free_flow_time': np.array([link.free_flow_time for link in self.links], dtype = float),
            'capacity': np.array([link.capacity for link in self.links], dtype = float),
            'lat': np.array([node.lat for node in self.nodes], dtype = float),
            'lon': np.array([node.lon for node in self.nodes], dtype = float),
        }

    def link(self, link_id):
        return self.links_by_id[link_id]

    def has_link(self, link_id):
        return link_id in self.links_by_id

    def incident_links(self, node_id):
        return [link.id for link in self.links if link.from_node == node_id or link.to_node == node_id]

    def extent(self):
        # Tight box around the nodes, falls back to a tiny box for a single point
        lats = self.arrays['lat']
        lons = self.arrays['lon']
        min_lat, max_lat = float(lats.min()), float(lats.max())
        min_lon, max_lon = float(lons.min()), float(lons.max())
        if max_lat == min_lat:
            min_lat, max_lat = min_lat - 1e-6, max_lat + 1e-6
        if max_lon == min_lon:
            min_lon, max_lon = min_lon - 1e-6, max_lon + 1e-6

        return BoundingBox(min_lon, min_lat, max_lon, max_lat)


@dataclass(frozen = True)
class Zone:
    id: int
    centroid: str
    connectors: Tuple[str, ...]
    row: int = 0
    col: int = 0

    def __post_init__(self):
        if len(self.connectors) < 1:
            raise DomainValueError("Zone {} has no connector".format(self.id))


@dataclass(frozen = True)
class ZoneSet:
    zones: Tuple[Zone, ...]
    bbox: BoundingBox
    rows: int = 1
    cols: int = 1

    def __post_init__(self):
        ids = [zone.id for zone in self.zones]
        if len(set(ids)) != len(ids):
            raise DomainValueError("Zone ids are not unique")

        centroids = [zone.centroid for zone in self.zones]
        if len(set(centroids)) != len(centroids):
            raise DomainValueError("Zone centroids are not distinct")

    def __len__(self):
        return len(self.zones)

    @cached_property
    def zone_index(self) -> Dict[int, int]:
        return {zone.id: idx for idx, zone in enumerate(self.zones)}

    @property
    def ids(self):
        return [zone.id for zone in self.zones]

    def cell_polygon(self, zone):
        # Grid cell rectangle as a closed GeoJSON ring
        d_lat = (self.bbox.max_lat - self.bbox.min_lat) / self.rows
        d_lon = (self.bbox.max_lon - self.bbox.min_lon) / self.cols
        south = self.bbox.min_lat + zone.row * d_lat
        west = self.bbox.min_lon + zone.col * d_lon
        north, east = south + d_lat, west + d_lon

        return [[west, south], [east, south], [east, north], [west, north], [west, south]]
