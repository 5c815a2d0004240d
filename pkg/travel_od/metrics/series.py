# Standard imports
import datetime
import logging
from dataclasses import dataclass, replace
from typing import Tuple

import numpy as np
import pandas as pd

from travel_od.ingest.panel import check_slot
from travel_od.metrics.congestion import network_ci
from travel_od.metrics.variability import WindowSpec, network_cov
from travel_od.utils.errors import DomainValueError, UndefinedDayError, UndefinedDeltaError, UndefinedWindowError
from travel_od.utils.tables import write_table

logger = logging.getLogger(__name__)

KINDS = ('cov', 'ci')
SERIES_COLUMNS = ['date', 'slot', 'metric', 'value', 'n', 'annotations']


@dataclass(frozen = True)
class MetricSeries:
    kind: str
    slot: str
    dates: Tuple[datetime.date, ...]
    values: Tuple[float, ...]
    counts: Tuple[int, ...]
    annotations: Tuple[Tuple[datetime.date, str], ...] = ()
    # ratio for raw metric values, percent for relative change series
    unit: str = 'ratio'

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainValueError("Unknown metric kind {}".format(self.kind))
        if not (len(self.dates) == len(self.values) == len(self.counts)):
            raise DomainValueError("Series dates, values and counts differ in length")
        if any(later <= earlier for earlier, later in zip(self.dates, self.dates[1:])):
            raise DomainValueError("Series dates must be strictly increasing")
        for date, _ in self.annotations:
            if len(self.dates) == 0 or not self.dates[0] <= date <= self.dates[-1]:
                raise DomainValueError("Annotation on {} lies outside the series span".format(date))

    def __len__(self):
        return len(self.dates)

    @property
    def points(self):
        return list(zip(self.dates, self.values))

    @property
    def span(self):
        return (self.dates[0], self.dates[-1]) if len(self.dates) > 0 else None

    @property
    def metric_label(self):
        return self.kind if self.unit == 'ratio' else '{}_pct_change'.format(self.kind)

    def refs_on(self, date):
        return [ref for ann_date, ref in self.annotations if ann_date == date]

    def to_frame(self):
        return pd.DataFrame({
            'date': [date.isoformat() for date in self.dates],
            'slot': [self.slot] * len(self.dates),
            'metric': [self.metric_label] * len(self.dates),
            'value': list(self.values),
            'n': list(self.counts),
            'annotations': [';'.join(self.refs_on(date)) for date in self.dates],
        }, columns = SERIES_COLUMNS)


def _cov_points(panel, network, slot, width, min_length):
    points = []
    for anchor in panel.calendar:
        try:
            result = network_cov(panel, network, slot, WindowSpec(anchor, width), min_length)
        except UndefinedWindowError:
            logger.debug("No defined variability for the window ending %s (%s)", anchor, slot)
            continue

        points.append((anchor, result.value, result.n))

    return points


def _ci_points(panel, network, slot, width, min_length):
    daily = []
    for date in panel.calendar:
        try:
            daily.append((date, network_ci(panel, network, slot, date, min_length).value))
        except UndefinedDayError:
            logger.debug("No congestion index on %s (%s)", date, slot)

    # Trailing mean of the daily values whose dates fall inside each window
    points = []
    for anchor, _ in daily:
        window = WindowSpec(anchor, width)
        inside = [value for date, value in daily if window.contains(date)]
        points.append((anchor, float(np.mean(inside)), len(inside)))

    return points


def moving_series(panel, network, kind, slot, width = 7, min_length = None):
    """Network level metric series with one point per collection date.

    Days without collection get no point, so gaps in the calendar stay gaps
    in the series.
    """
    if kind not in KINDS:
        raise DomainValueError("Unknown metric kind {}".format(kind))

    slot = check_slot(slot)
    if kind == 'cov':
        points = _cov_points(panel, network, slot, int(width), min_length)
    else:
        points = _ci_points(panel, network, slot, int(width), min_length)

    logger.info("Built %s series for %s with %d points", kind, slot, len(points))

    return MetricSeries(
        kind = kind,
        slot = slot,
        dates = tuple(point[0] for point in points),
        values = tuple(point[1] for point in points),
        counts = tuple(point[2] for point in points)
    )


def relative_change(series):
    if len(series) == 0:
        return series

    first = series.values[0]
    if first == 0:
        raise UndefinedDeltaError("Series {} ({}) starts at zero, relative change is undefined".format(series.kind, series.slot))

    values = tuple(100.0 * (value - first) / first for value in series.values)
    return replace(series, values = values, unit = 'percent')


def write_series(series_list, path):
    frames = [series.to_frame() for series in series_list]
    frame = pd.concat(frames, ignore_index = True) if len(frames) > 0 else pd.DataFrame(columns = SERIES_COLUMNS)

    return write_table(frame, path, SERIES_COLUMNS)
