# Standard imports
import logging

import numpy as np

from travel_od.network.elements import Zone, ZoneSet
from travel_od.utils.errors import ZoningError
from travel_od.utils.geodesy import haversine_m

logger = logging.getLogger(__name__)


def grid_cells(lats, lons, bbox, rows, cols):
    # Row 0 is the southern band, nodes on the far edges fall into the last row/column
    d_lat = (bbox.max_lat - bbox.min_lat) / rows
    d_lon = (bbox.max_lon - bbox.min_lon) / cols

    row_idx = np.clip(np.floor((lats - bbox.min_lat) / d_lat).astype(np.int64), 0, rows - 1)
    col_idx = np.clip(np.floor((lons - bbox.min_lon) / d_lon).astype(np.int64), 0, cols - 1)

    return row_idx, col_idx


def build_zones(network, rows, cols):
    rows, cols = int(rows), int(cols)
    if rows < 1 or cols < 1 or rows * cols < 2:
        raise ZoningError("A {}x{} grid cannot hold an OD matrix".format(rows, cols))

    bbox = network.extent()
    lats = network.arrays['lat']
    lons = network.arrays['lon']
    row_idx, col_idx = grid_cells(lats, lons, bbox, rows, cols)

    d_lat = (bbox.max_lat - bbox.min_lat) / rows
    d_lon = (bbox.max_lon - bbox.min_lon) / cols

    # Incident links per node, in link order
    incident = {node.id: [] for node in network.nodes}
    for link in network.links:
        incident[link.from_node].append(link.id)
        incident[link.to_node].append(link.id)

    zones = []
    for row in range(rows):
        for col in range(cols):
            members = np.flatnonzero((row_idx == row) & (col_idx == col))
            if len(members) == 0:
                continue

            center_lat = bbox.min_lat + (row + 0.5) * d_lat
            center_lon = bbox.min_lon + (col + 0.5) * d_lon
            distances = haversine_m(lats[members], lons[members], center_lat, center_lon)

            # argmin keeps the first of equal distances, i.e. the smallest node index
            centroid = network.nodes[members[int(np.argmin(distances))]].id
            zones.append(Zone(
                id = len(zones) + 1,
                centroid = centroid,
                connectors = tuple(incident[centroid]),
                row = row,
                col = col
            ))

    if len(zones) < 2:
        raise ZoningError("Only {} non-empty cell(s) in a {}x{} grid".format(len(zones), rows, cols))

    logger.info("Built %d zones from a %dx%d grid", len(zones), rows, cols)

    return ZoneSet(zones = tuple(zones), bbox = bbox, rows = rows, cols = cols)
