# Standard imports
import datetime
import logging
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import pandas as pd

from travel_od.ingest.panel import as_date
from travel_od.utils.errors import DomainValueError, PanelSchemaError, UnknownCityError
from travel_od.utils.tables import read_table

logger = logging.getLogger(__name__)

TIMELINE_COLUMNS = ['city', 'ref', 'description', 'start_date', 'end_date']

# Events still running at the end of the record have no end date
OPEN_END = datetime.date.max


@dataclass(frozen = True)
class TimelineEvent:
    city: str
    ref: str
    description: str
    start: datetime.date
    end: Optional[datetime.date] = None

    def __post_init__(self):
        if self.end is not None and self.end < self.start:
            raise DomainValueError("Event {} in {} ends before it starts".format(self.ref, self.city))

    @property
    def last_day(self):
        return OPEN_END if self.end is None else self.end


@dataclass(frozen = True)
class EventTimeline:
    entries: Tuple[TimelineEvent, ...]

    @property
    def cities(self):
        return sorted(set(entry.city for entry in self.entries))

    def for_city(self, city):
        events = [entry for entry in self.entries if entry.city.lower() == str(city).lower()]
        if len(events) == 0:
            raise UnknownCityError("City {} is not in the timeline, known cities: {}".format(city, self.cities))

        return events


def load_timeline(path):
    frame = read_table(path, TIMELINE_COLUMNS, dtype = str, error = PanelSchemaError)

    entries = []
    for row in frame.itertuples(index = False):
        try:
            start = as_date(row.start_date)
            end = None if pd.isna(row.end_date) or str(row.end_date).strip() == '' else as_date(row.end_date)
        except (TypeError, ValueError) as exc:
            raise PanelSchemaError("{} has an invalid date for {} event {}: {}".format(path, row.city, row.ref, exc)) from exc

        entries.append(TimelineEvent(
            city = str(row.city).strip(),
            ref = '-' if pd.isna(row.ref) else str(row.ref).strip(),
            description = '' if pd.isna(row.description) else str(row.description),
            start = start,
            end = end
        ))

    logger.info("Loaded %d timeline events for %d cities from %s", len(entries), len(set(e.city for e in entries)), path)

    return EventTimeline(tuple(entries))


def annotate(series, timeline, city):
    """Attaches event refs to the series points covered by each event.

    An event overlapping the series span without covering any collection date
    is pinned to the first day of the overlap.
    """
    events = timeline.for_city(city)
    if len(series) == 0:
        return replace(series, annotations = ())

    first, last = series.span
    annotations = []
    for event in events:
        start = max(event.start, first)
        end = min(event.last_day, last)
        if start > end:
            continue

        covered = [date for date in series.dates if start <= date <= end]
        for date in covered or [start]:
            annotations.append((date, event.ref))

    # Same event listed twice (e.g. an attack and a curfew sharing a ref) yields one mark
    annotations = sorted(set(annotations), key = lambda item: (item[0], item[1]))

    return replace(series, annotations = tuple(annotations))
