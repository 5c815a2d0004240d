# Standard imports
import logging

import numpy as np
import pandas as pd

from travel_od.utils.errors import DomainValueError, PanelSchemaError
from travel_od.utils.tables import read_table, write_table

logger = logging.getLogger(__name__)

OD_COLUMNS = ['origin_zone', 'dest_zone', 'trips']


class ODMatrix(object):
    """Trips per analysis period between ordered zone pairs.

    Rows and columns follow the order of `zones.zones`.
    """

    def __init__(self, zones, demand):
        demand = np.array(demand, dtype = float)
        size = len(zones)

        if demand.shape != (size, size):
            raise DomainValueError("Demand shape {} does not match {} zones".format(demand.shape, size))
        if not np.all(np.isfinite(demand)):
            raise DomainValueError("Demand holds non-finite entries")
        if np.any(demand < 0):
            raise DomainValueError("Demand holds negative entries")
        if np.any(np.diag(demand) != 0):
            raise DomainValueError("Demand diagonal must be zero")

        demand.setflags(write = False)
        self.zones = zones
        self.demand = demand

    @classmethod
    def zeros(cls, zones):
        return cls(zones, np.zeros((len(zones), len(zones))))

    @classmethod
    def from_cells(cls, zones, cells):
        # Off-diagonal cells in row-major order
        size = len(zones)
        cells = np.asarray(cells, dtype = float)
        if len(cells) != size * (size - 1):
            raise DomainValueError("Expected {} off-diagonal cells, got {}".format(size * (size - 1), len(cells)))

        demand = np.zeros((size, size))
        demand[~np.eye(size, dtype = bool)] = cells
        return cls(zones, demand)

    def cells(self):
        return self.demand[~np.eye(len(self.zones), dtype = bool)].copy()

    @property
    def total(self):
        return float(self.demand.sum())

    @property
    def productions(self):
        return self.demand.sum(axis = 1)

    @property
    def attractions(self):
        return self.demand.sum(axis = 0)

    def trips(self, origin_zone, dest_zone):
        index = self.zones.zone_index
        return float(self.demand[index[origin_zone], index[dest_zone]])

    def scaled(self, factor):
        return ODMatrix(self.zones, self.demand * float(factor))

    def __eq__(self, other):
        return isinstance(other, ODMatrix) and self.zones.ids == other.zones.ids and np.array_equal(self.demand, other.demand)

    def __repr__(self):
        return "ODMatrix(zones={}, total={:.3f})".format(len(self.zones), self.total)

    def to_frame(self):
        ids = self.zones.ids
        rows = [(ids[o], ids[d], float(self.demand[o, d])) for o in range(len(ids)) for d in range(len(ids)) if o != d]
        return pd.DataFrame(rows, columns = OD_COLUMNS)


def load_od(path, zones):
    frame = read_table(path, OD_COLUMNS, error = PanelSchemaError)

    index = zones.zone_index
    demand = np.zeros((len(zones), len(zones)))
    seen = set()
    for row in frame.itertuples(index = False):
        origin, dest = int(row.origin_zone), int(row.dest_zone)
        if origin not in index or dest not in index:
            raise PanelSchemaError("{} refers to unknown zone pair ({}, {})".format(path, origin, dest))
        if (origin, dest) in seen:
            raise PanelSchemaError("{} lists zone pair ({}, {}) more than once".format(path, origin, dest))
        if origin == dest and float(row.trips) != 0:
            raise PanelSchemaError("{} has intrazonal trips for zone {}".format(path, origin))

        seen.add((origin, dest))
        demand[index[origin], index[dest]] = float(row.trips)

    try:
        od = ODMatrix(zones, demand)
    except DomainValueError as exc:
        raise PanelSchemaError("{}: {}".format(path, exc)) from exc

    logger.info("Loaded OD matrix with %.1f trips over %d zones from %s", od.total, len(zones), path)

    return od


def write_od(od, path):
    return write_table(od.to_frame(), path, OD_COLUMNS)
