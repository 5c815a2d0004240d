# Standard imports
import datetime
import logging
from dataclasses import dataclass

import numpy as np

from travel_od.ingest.panel import as_date, check_slot
from travel_od.metrics.variability import resolve_min_length
from travel_od.utils.errors import MissingFreeFlowError, UndefinedDayError
from travel_od.utils.logs import quality_logger

logger = logging.getLogger(__name__)


@dataclass(frozen = True)
class LinkCongestion:
    link: str
    slot: str
    date: datetime.date
    travel_time: float
    free_flow: float
    index: float


@dataclass(frozen = True)
class NetworkCongestion:
    slot: str
    date: datetime.date
    value: float
    n: int


def resolve_free_flow(link, provider_value, network):
    # Provider free flow wins over the class derived network value
    if provider_value is not None and not np.isnan(provider_value):
        return float(provider_value)

    if network.has_link(link):
        return network.link(link).free_flow_time

    raise MissingFreeFlowError("No free flow time for link {}".format(link))


def link_ci(obs, network):
    free_flow = resolve_free_flow(obs.link, obs.free_flow_time, network)
    index = obs.travel_time / free_flow

    if index < 1.0:
        quality_logger.warning("Link %s on %s (%s) is faster than free flow, index %.3f",
            obs.link, obs.date, obs.slot, index)

    return LinkCongestion(obs.link, obs.slot, obs.date, obs.travel_time, free_flow, index)


def daily_link_indexes(panel, network, slot, date, min_length = None):
    # (link ids, indexes) of the observations on one day that pass the length filter
    min_length = resolve_min_length(network, min_length)
    frame = panel.select(slot = slot, start = date, end = date)

    known = np.array([network.has_link(link) for link in frame['link_id']], dtype = bool)
    unknown = int(np.sum(~known))
    if unknown > 0:
        quality_logger.warning("%d observations on %s (%s) name links missing from the network", unknown, date, slot)

    keep = np.array([is_known and network.link(link).length >= min_length for link, is_known in zip(frame['link_id'], known)], dtype = bool)
    frame = frame.loc[keep]
    if len(frame) == 0:
        return np.array([], dtype = object), np.array([], dtype = float)

    network_fft = np.array([network.link(link).free_flow_time for link in frame['link_id']], dtype = float)
    provider_fft = frame['free_flow_s'].to_numpy(dtype = float)
    free_flow = np.where(np.isnan(provider_fft), network_fft, provider_fft)

    indexes = frame['travel_time_s'].to_numpy(dtype = float) / free_flow
    below = int(np.sum(indexes < 1.0))
    if below > 0:
        quality_logger.warning("%d observations on %s (%s) are faster than free flow", below, date, slot)

    return frame['link_id'].to_numpy(), indexes


def network_ci(panel, network, slot, date, min_length = None):
    slot = check_slot(slot)
    date = as_date(date)

    _, indexes = daily_link_indexes(panel, network, slot, date, min_length)
    if len(indexes) == 0:
        raise UndefinedDayError("No observations on {} ({}) pass the length filter".format(date, slot))

    return NetworkCongestion(slot, date, float(np.mean(indexes)), len(indexes))
