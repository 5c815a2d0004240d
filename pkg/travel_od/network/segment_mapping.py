# Standard imports
import logging

import numpy as np
import pandas as pd
from scipy.spatial import cKDTree

from travel_od.utils.config import section
from travel_od.utils.errors import MappingLoadError
from travel_od.utils.geodesy import local_xy_m
from travel_od.utils.logs import quality_logger
from travel_od.utils.tables import read_table, write_table

logger = logging.getLogger(__name__)


def _coordinate_pairs(coordinates):
    # Accepting [[lat, lon], ...] or the provider's {"coordinate": [{"latitude":, "longitude":}]} shape
    if coordinates is None:
        return None
    if isinstance(coordinates, dict):
        coordinates = coordinates.get('coordinate', [])

    pairs = []
    for point in coordinates:
        if isinstance(point, dict):
            pairs.append((float(point['latitude']), float(point['longitude'])))
        else:
            pairs.append((float(point[0]), float(point[1])))

    return pairs if len(pairs) >= 2 else None


class SegmentMapping(object):
    """Joins provider segment keys to network link ids.

    Keys missing from the table are resolved geometrically when the record
    carries coordinates and matching is enabled, otherwise they are counted
    in the unmatched report.
    """

    def __init__(self, network, table = None, cfg = None):
        self.cfg = section(cfg, 'network').matching
        self.network = network
        self.table = dict(table or {})
        self.unmatched = {}

        self.geometric = bool(self.cfg.geometric)
        self.tolerance = float(self.cfg.match_tolerance_m)

        for key, link_id in self.table.items():
            if not network.has_link(link_id):
                raise MappingLoadError("Segment {} maps to unknown link {}".format(key, link_id))

        self._tree = None

    @classmethod
    def load(cls, path, network, cfg = None):
        frame = read_table(path, ['segment_key', 'link_id'], dtype = str, error = MappingLoadError)
        frame = frame.drop_duplicates()

        conflicting = frame[frame.duplicated('segment_key', keep = False)]
        if len(conflicting) > 0:
            keys = sorted(conflicting['segment_key'].unique())
            raise MappingLoadError("Conflicting link targets for segment keys {}".format(keys))

        table = dict(zip(frame['segment_key'], frame['link_id']))
        logger.info("Loaded %d segment key mappings from %s", len(table), path)

        return cls(network, table, cfg)

    def _node_tree(self):
        if self._tree is None:
            lats = self.network.arrays['lat']
            lons = self.network.arrays['lon']
            self._ref = (float(lats.mean()), float(lons.mean()))
            x, y = local_xy_m(lats, lons, *self._ref)
            self._tree = cKDTree(np.column_stack([x, y]))

        return self._tree

    def _match_geometry(self, pairs):
        tree = self._node_tree()
        start = np.column_stack(local_xy_m(pairs[0][0], pairs[0][1], *self._ref))[0]
        end = np.column_stack(local_xy_m(pairs[-1][0], pairs[-1][1], *self._ref))[0]

        start_nodes = set(tree.query_ball_point(start, self.tolerance))
        end_nodes = set(tree.query_ball_point(end, self.tolerance))
        if len(start_nodes) == 0 or len(end_nodes) == 0:
            return None

        arrays = self.network.arrays
        positions = tree.data
        best, best_distance = None, np.inf
        for idx, link in enumerate(self.network.links):
            from_idx, to_idx = int(arrays['from'][idx]), int(arrays['to'][idx])
            if from_idx not in start_nodes or to_idx not in end_nodes:
                continue

            distance = np.linalg.norm(positions[from_idx] - start) + np.linalg.norm(positions[to_idx] - end)
            if distance < best_distance:
                best, best_distance = link.id, distance

        return best

    def link_lookup(self, segment_key, coordinates = None):
        segment_key = str(segment_key)
        if segment_key in self.table:
            return self.table[segment_key]

        if self.geometric:
            pairs = _coordinate_pairs(coordinates)
            if pairs is not None:
                link_id = self._match_geometry(pairs)
                if link_id is not None:
                    return link_id

        self.unmatched[segment_key] = self.unmatched.get(segment_key, 0) + 1
        quality_logger.warning("Segment key %s did not match any link", segment_key)

        return None

    def unmatched_report(self):
        keys = sorted(self.unmatched)
        return pd.DataFrame({'segment_key': keys, 'count': [self.unmatched[key] for key in keys]})

    def write_unmatched(self, path):
        return write_table(self.unmatched_report(), path)


def link_lookup(network, external_segment_key, mapping):
    if mapping.network is not network:
        raise MappingLoadError("Segment mapping was loaded for a different network")

    return mapping.link_lookup(external_segment_key)
