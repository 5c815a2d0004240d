# Standard imports
import json
import logging
import os

import matplotlib
import numpy as np
from matplotlib.colors import to_hex

from travel_od.utils.errors import EmptyValuesError

logger = logging.getLogger(__name__)

DEFAULT_COLORMAP = 'RdBu_r'


def hue_positions(values):
    # Min-max over the emitted set, a flat set sits in the middle of the scale
    values = np.asarray(values, dtype = float)
    low, high = float(values.min()), float(values.max())
    if high == low:
        return np.full(len(values), 0.5)

    return (values - low) / (high - low)


def hue_map(network, values, colormap = DEFAULT_COLORMAP):
    """GeoJSON FeatureCollection with one LineString per valued link."""
    links = [link for link in network.links if link.id in values]
    if len(links) == 0:
        raise EmptyValuesError("No link of the network carries a value for the hue map")

    unknown = len(set(values) - set(network.links_by_id))
    if unknown > 0:
        logger.debug("%d valued links are not part of the network and were left out", unknown)

    raw = [float(values[link.id]) for link in links]
    positions = hue_positions(raw)
    cmap = matplotlib.colormaps[colormap]

    features = []
    for link, value, position in zip(links, raw, positions):
        start = network.nodes_by_id[link.from_node]
        end = network.nodes_by_id[link.to_node]
        features.append({
            'type': 'Feature',
            'geometry': {
                'type': 'LineString',
                'coordinates': [[start.lon, start.lat], [end.lon, end.lat]],
            },
            'properties': {
                'link_id': link.id,
                'value': value,
                'hue01': float(position),
                'color': to_hex(cmap(float(position))),
            },
        })

    return {'type': 'FeatureCollection', 'features': features}


def write_geojson(document, path):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok = True)
    with open(path, 'w') as file:
        json.dump(document, file, indent = 2, sort_keys = True)
        file.write('\n')

    return path
