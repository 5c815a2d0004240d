"""Travel time variability over moving windows.

A link's coefficient of variation is the population standard deviation of its
observed travel times inside the window divided by their mean. The network
value is the plain average over links whose coefficient is defined.
"""

# Standard imports
import datetime
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from travel_od.ingest.panel import as_date, check_slot
from travel_od.utils.errors import DomainValueError, UndefinedWindowError

logger = logging.getLogger(__name__)

# Length filters per network mode (meters)
DEFAULT_MIN_LENGTH = {'city': 100.0, 'highway': 500.0}


def resolve_min_length(network, min_length = None):
    if min_length is not None:
        return float(min_length)

    return DEFAULT_MIN_LENGTH[network.mode]


@dataclass(frozen = True)
class WindowSpec:
    anchor: datetime.date
    width: int = 7

    def __post_init__(self):
        if int(self.width) < 1:
            raise DomainValueError("Window width must be at least one day, got {}".format(self.width))
        object.__setattr__(self, 'anchor', as_date(self.anchor))
        object.__setattr__(self, 'width', int(self.width))

    @property
    def start(self):
        return self.anchor - datetime.timedelta(days = self.width - 1)

    def contains(self, date):
        return self.start <= as_date(date) <= self.anchor

    def shifted(self, days):
        return WindowSpec(self.anchor + datetime.timedelta(days = days), self.width)


@dataclass(frozen = True)
class LinkCov:
    link: str
    slot: str
    window: WindowSpec
    mean: float
    std: float
    cov: float
    sample_size: int


@dataclass(frozen = True)
class NetworkCov:
    slot: str
    window: WindowSpec
    value: float
    n: int


def cov_kernel(values):
    # Returns (mean, std, cov) or None when the coefficient is undefined
    values = np.asarray(values, dtype = float)
    if len(values) < 2:
        return None

    mean = float(np.mean(values))
    if not mean > 0:
        return None

    std = float(np.std(values))
    return mean, std, std / mean


def link_cov(panel, link, slot, window) -> Optional[LinkCov]:
    slot = check_slot(slot)
    values = panel.select(link = link, slot = slot, start = window.start, end = window.anchor)['travel_time_s'].to_numpy(dtype = float)

    stats = cov_kernel(values)
    if stats is None:
        return None

    return LinkCov(link, slot, window, stats[0], stats[1], stats[2], len(values))


def window_link_covs(panel, network, slot, window, min_length = None):
    slot = check_slot(slot)
    min_length = resolve_min_length(network, min_length)
    frame = panel.select(slot = slot, start = window.start, end = window.anchor)

    covs = []
    for link, values in frame.groupby('link_id', sort = True)['travel_time_s']:
        if not network.has_link(link) or network.link(link).length < min_length:
            continue

        stats = cov_kernel(values.to_numpy(dtype = float))
        if stats is not None:
            covs.append(LinkCov(link, slot, window, stats[0], stats[1], stats[2], len(values)))

    return covs


def network_cov(panel, network, slot, window, min_length = None):
    covs = window_link_covs(panel, network, slot, window, min_length)
    if len(covs) == 0:
        raise UndefinedWindowError("No link has a defined coefficient of variation in the {}-day window ending {} ({})".format(
            window.width, window.anchor, check_slot(slot)))

    value = float(np.mean([item.cov for item in covs]))
    return NetworkCov(check_slot(slot), window, value, len(covs))


def study_period_cov(panel, network, slot, min_length = None):
    """Per link coefficient of variation over the whole collection calendar."""
    calendar = panel.calendar
    if len(calendar) == 0:
        raise UndefinedWindowError("Panel holds no observations")

    window = WindowSpec(calendar[-1], (calendar[-1] - calendar[0]).days + 1)
    covs = window_link_covs(panel, network, slot, window, min_length)
    logger.info("Study period variability defined on %d links over %d days", len(covs), window.width)

    return {item.link: item.cov for item in covs}
