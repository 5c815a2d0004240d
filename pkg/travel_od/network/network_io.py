# Standard imports
import os

import pandas as pd
import yaml

from travel_od.network.elements import BoundingBox, Link, Node, RoadNetwork, Zone, ZoneSet
from travel_od.utils.errors import MissingArtifactError, NetworkParseError, ZoningError
from travel_od.utils.tables import read_table, write_table

NODE_COLUMNS = ['id', 'lat', 'lon']
LINK_COLUMNS = ['id', 'from', 'to', 'length_m', 'fft_s', 'capacity_vph', 'class']
ZONE_COLUMNS = ['zone_id', 'centroid_node', 'row', 'col']


def _write_yaml(data, path):
    with open(path, 'w') as file:
        yaml.safe_dump(data, file, sort_keys = True, default_flow_style = False)

    return path


def _read_yaml(path):
    if not os.path.exists(path):
        raise MissingArtifactError("Missing artifact {}".format(path))

    with open(path, 'r') as file:
        return yaml.safe_load(file)


def write_network(network, directory):
    os.makedirs(directory, exist_ok = True)

    nodes = pd.DataFrame({
        'id': [node.id for node in network.nodes],
        'lat': [node.lat for node in network.nodes],
        'lon': [node.lon for node in network.nodes],
    })
    links = pd.DataFrame({
        'id': [link.id for link in network.links],
        'from': [link.from_node for link in network.links],
        'to': [link.to_node for link in network.links],
        'length_m': [link.length for link in network.links],
        'fft_s': [link.free_flow_time for link in network.links],
        'capacity_vph': [link.capacity for link in network.links],
        'class': [link.road_class for link in network.links],
    })

    meta = {'mode': network.mode, 'bbox': network.bbox.as_dict() if network.bbox is not None else None}

    return [
        write_table(nodes, os.path.join(directory, 'nodes.csv'), NODE_COLUMNS),
        write_table(links, os.path.join(directory, 'links.csv'), LINK_COLUMNS),
        _write_yaml(meta, os.path.join(directory, 'network.yaml')),
    ]


def load_network(directory):
    for name in ('nodes.csv', 'links.csv', 'network.yaml'):
        if not os.path.exists(os.path.join(directory, name)):
            raise MissingArtifactError("Missing network artifact {}, run build-network first".format(os.path.join(directory, name)))

    meta = _read_yaml(os.path.join(directory, 'network.yaml'))
    nodes = read_table(os.path.join(directory, 'nodes.csv'), NODE_COLUMNS, dtype = {'id': str}, error = NetworkParseError)
    links = read_table(os.path.join(directory, 'links.csv'), LINK_COLUMNS,
        dtype = {'id': str, 'from': str, 'to': str, 'class': str}, error = NetworkParseError)

    bbox = BoundingBox(**meta['bbox']) if meta.get('bbox') else None

    return RoadNetwork(
        nodes = tuple(Node(row.id, float(row.lat), float(row.lon)) for row in nodes.itertuples(index = False)),
        links = tuple(
            Link(row[0], row[1], row[2], float(row[3]), float(row[4]), float(row[5]), row[6])
            for row in links.itertuples(index = False, name = None)
        ),
        mode = meta['mode'],
        bbox = bbox
    )


def write_zones(zones, directory):
    os.makedirs(directory, exist_ok = True)

    frame = pd.DataFrame({
        'zone_id': [zone.id for zone in zones.zones],
        'centroid_node': [zone.centroid for zone in zones.zones],
        'row': [zone.row for zone in zones.zones],
        'col': [zone.col for zone in zones.zones],
    })
    meta = {'bbox': zones.bbox.as_dict(), 'rows': zones.rows, 'cols': zones.cols}

    return [
        write_table(frame, os.path.join(directory, 'zones.csv'), ZONE_COLUMNS),
        _write_yaml(meta, os.path.join(directory, 'zones.yaml')),
    ]


def load_zones(directory, network):
    path = os.path.join(directory, 'zones.csv')
    if not os.path.exists(path):
        raise MissingArtifactError("Missing zoning artifact {}, run build-zones first".format(path))

    meta = _read_yaml(os.path.join(directory, 'zones.yaml'))
    frame = read_table(path, ZONE_COLUMNS, dtype = {'centroid_node': str}, error = ZoningError)

    zones = []
    for row in frame.itertuples(index = False):
        if row.centroid_node not in network.nodes_by_id:
            raise ZoningError("Centroid {} of zone {} is not a network node".format(row.centroid_node, row.zone_id))

        zones.append(Zone(
            id = int(row.zone_id),
            centroid = row.centroid_node,
            connectors = tuple(network.incident_links(row.centroid_node)),
            row = int(row.row),
            col = int(row.col)
        ))

    return ZoneSet(zones = tuple(zones), bbox = BoundingBox(**meta['bbox']), rows = int(meta['rows']), cols = int(meta['cols']))
