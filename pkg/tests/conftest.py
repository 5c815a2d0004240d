# Standard imports
import datetime
import os

import numpy as np
import pytest

from travel_od.ingest.panel import ObservationPanel, TravelTimeObservation
from travel_od.network.elements import BoundingBox, Link, Node, RoadNetwork, Zone, ZoneSet
from travel_od.utils.config import load_config

SAMPLE_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'travel_od', 'sample_data')


@pytest.fixture(scope = 'session')
def cfg():
    return load_config()


@pytest.fixture
def sample_dir():
    return SAMPLE_DIR


def make_network(link_specs, coordinates = None, mode = 'city'):
    """Network from (id, from, to, length, fft, capacity) tuples.

    Nodes without explicit coordinates are spread along a meridian.
    """
    node_ids = []
    for spec in link_specs:
        for node_id in (spec[1], spec[2]):
            if node_id not in node_ids:
                node_ids.append(node_id)

    coordinates = coordinates or {}
    nodes = tuple(
        Node(node_id, *coordinates.get(node_id, (50.0 + 0.001 * idx, 30.0)))
        for idx, node_id in enumerate(node_ids)
    )
    links = tuple(Link(spec[0], spec[1], spec[2], float(spec[3]), float(spec[4]), float(spec[5]), 'primary') for spec in link_specs)

    return RoadNetwork(nodes = nodes, links = links, mode = mode)


def grid_network(rows, cols, capacity = 900.0, spacing = 0.002, fft = 14.4, length = 200.0):
    # Bidirectional lattice with node ids 1..rows*cols in row-major order
    coordinates = {}
    specs = []
    for r in range(rows):
        for c in range(cols):
            node_id = str(r * cols + c + 1)
            coordinates[node_id] = (50.0 + r * spacing, 30.0 + c * spacing)
            if c + 1 < cols:
                right = str(r * cols + c + 2)
                specs.append(('h{}-{}-f'.format(r, c), node_id, right, length, fft, capacity))
                specs.append(('h{}-{}-b'.format(r, c), right, node_id, length, fft, capacity))
            if r + 1 < rows:
                up = str((r + 1) * cols + c + 1)
                specs.append(('v{}-{}-f'.format(r, c), node_id, up, length, fft, capacity))
                specs.append(('v{}-{}-b'.format(r, c), up, node_id, length, fft, capacity))

    return make_network(specs, coordinates)


def make_zones(network, centroids):
    # One zone per centroid node, ids from 1, connectors are the incident links
    zones = tuple(
        Zone(idx + 1, centroid, tuple(network.incident_links(centroid)), 0, idx)
        for idx, centroid in enumerate(centroids)
    )
    return ZoneSet(zones = zones, bbox = BoundingBox(29.0, 49.0, 31.0, 51.0), rows = 1, cols = len(zones))


def bare_zones(count):
    # Zones that only carry ids, for matrix level tests
    zones = tuple(Zone(idx + 1, 'c{}'.format(idx + 1), ('l{}'.format(idx + 1),)) for idx in range(count))
    return ZoneSet(zones = zones, bbox = BoundingBox(0.0, 0.0, 1.0, 1.0), rows = 1, cols = count)


def make_panel(rows):
    # rows of (link, date, slot, travel time[, free flow])
    return ObservationPanel.from_observations([
        TravelTimeObservation(row[0], row[1], row[2], float(row[3]), None if len(row) < 5 else row[4])
        for row in rows
    ])


def day(offset, start = datetime.date(2022, 2, 25)):
    return start + datetime.timedelta(days = offset)


def random_panel(links, days, seed = 0, slots = ('morning', 'afternoon', 'evening')):
    rng = np.random.default_rng(seed)
    rows = []
    for link in links:
        for offset in range(days):
            for slot in slots:
                rows.append((link, day(offset), slot, float(np.round(rng.uniform(10.0, 14.0), 2))))

    return make_panel(rows)


def write_text(path, text):
    os.makedirs(os.path.dirname(str(path)) or '.', exist_ok = True)
    with open(path, 'w') as file:
        file.write(text)

    return str(path)
