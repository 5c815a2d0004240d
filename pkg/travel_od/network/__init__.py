from travel_od.network.elements import BoundingBox, Link, Node, RoadNetwork, Zone, ZoneSet
from travel_od.network.network_io import load_network, load_zones, write_network, write_zones
from travel_od.network.osm_parser import parse_network
from travel_od.network.segment_mapping import SegmentMapping, link_lookup
from travel_od.network.zoning import build_zones
