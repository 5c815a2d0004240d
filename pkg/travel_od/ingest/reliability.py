# Standard imports
import logging
import os
from dataclasses import dataclass
from typing import Tuple

import numpy as np
import pandas as pd

from travel_od.utils.errors import DomainValueError, EmptyReportError, MissingLinkError
from travel_od.utils.logs import quality_logger
from travel_od.utils.tables import write_table

logger = logging.getLogger(__name__)

DEFAULT_RESOLUTION = 0.1


def distinct_count(values, resolution = DEFAULT_RESOLUTION):
    # Values are compared on an integer grid of the given resolution
    steps = np.rint(np.asarray(values, dtype = float) / resolution).astype(np.int64)
    return int(len(np.unique(steps)))


def unique_update_count(panel, link, slot = None, resolution = DEFAULT_RESOLUTION):
    values = panel.values(link, slot)
    if len(values) == 0:
        raise MissingLinkError("Link {} has no observations in the panel".format(link))

    return distinct_count(values, resolution)


@dataclass(frozen = True)
class ReliabilityReport:
    link_ids: Tuple[str, ...]
    lengths: Tuple[float, ...]
    counts: Tuple[int, ...]
    bins: Tuple[int, ...]
    links_per_bin: Tuple[int, ...]
    probability: Tuple[float, ...]
    min_length: float

    def count_for(self, link_id):
        return self.counts[self.link_ids.index(link_id)]

    def links_frame(self):
        return pd.DataFrame({'link_id': list(self.link_ids), 'length_m': list(self.lengths), 'unique_count': list(self.counts)})

    def histogram_frame(self):
        return pd.DataFrame({'count': list(self.bins), 'links': list(self.links_per_bin), 'probability': list(self.probability)})


def reliability_report(panel, network, min_length, slot = None, resolution = DEFAULT_RESOLUTION):
    if not min_length > 0:
        raise DomainValueError("min_length must be positive, got {}".format(min_length))

    frame = panel.select(slot = slot)
    steps = np.rint(frame['travel_time_s'].to_numpy(dtype = float) / resolution).astype(np.int64)
    counts = pd.Series(steps, index = frame['link_id'].to_numpy()).groupby(level = 0).nunique()

    link_ids, lengths, kept_counts = [], [], []
    missing = 0
    for link_id, count in counts.items():
        if not network.has_link(link_id):
            missing += 1
            continue

        length = network.link(link_id).length
        if length < min_length:
            continue

        link_ids.append(link_id)
        lengths.append(length)
        kept_counts.append(int(count))

    if missing > 0:
        quality_logger.warning("%d panel links are not part of the network and were skipped", missing)

    if len(link_ids) == 0:
        raise EmptyReportError("No observed link is at least {} m long".format(min_length))

    # Integer bins 1..max count, probability mass per bin
    bins = np.arange(1, max(kept_counts) + 1)
    links_per_bin = np.bincount(np.asarray(kept_counts), minlength = bins[-1] + 1)[1:]
    probability = links_per_bin / float(len(kept_counts))

    logger.info("Reliability report over %d links (>= %.0f m), median %d unique updates",
        len(link_ids), min_length, int(np.median(kept_counts)))

    return ReliabilityReport(
        link_ids = tuple(link_ids),
        lengths = tuple(lengths),
        counts = tuple(kept_counts),
        bins = tuple(int(value) for value in bins),
        links_per_bin = tuple(int(value) for value in links_per_bin),
        probability = tuple(float(value) for value in probability),
        min_length = float(min_length)
    )


def write_reliability_report(report, directory):
    return [
        write_table(report.links_frame(), os.path.join(directory, 'reliability_links.csv')),
        write_table(report.histogram_frame(), os.path.join(directory, 'reliability_histogram.csv')),
    ]
