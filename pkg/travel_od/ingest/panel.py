"""Travel time observation panels indexed by (link, date, departure slot)."""

# Standard imports
import datetime
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
import pandas as pd

from travel_od.utils.errors import ConflictingDuplicateError, DomainValueError, PanelSchemaError
from travel_od.utils.tables import read_table, write_table

logger = logging.getLogger(__name__)

PANEL_COLUMNS = ['link_id', 'date', 'slot', 'travel_time_s', 'free_flow_s']
REQUIRED_COLUMNS = ['link_id', 'date', 'slot', 'travel_time_s']

# Pools the three departure slots
WHOLE_DAY = 'whole_day'


class DepartureSlot(Enum):
    MORNING = 'morning'
    AFTERNOON = 'afternoon'
    EVENING = 'evening'

    @property
    def clock_time(self):
        return {
            'morning': datetime.time(9, 0),
            'afternoon': datetime.time(13, 0),
            'evening': datetime.time(17, 0),
        }[self.value]

    @classmethod
    def nearest(cls, moment):
        # Slot whose nominal clock time is closest to the collection time of day
        minutes = moment.hour * 60 + moment.minute
        return min(cls, key = lambda slot: abs(slot.clock_time.hour * 60 + slot.clock_time.minute - minutes))


SLOT_ORDER = [slot.value for slot in DepartureSlot]


def check_slot(slot, allow_whole_day = True):
    if slot is None:
        return WHOLE_DAY if allow_whole_day else None

    value = slot.value if isinstance(slot, DepartureSlot) else str(slot)
    if value in SLOT_ORDER or (allow_whole_day and value == WHOLE_DAY):
        return value

    raise DomainValueError("Unknown departure slot {}".format(slot))


def as_date(value):
    if isinstance(value, datetime.datetime):
        return value.date()
    if isinstance(value, datetime.date):
        return value
    if isinstance(value, np.datetime64):
        return pd.Timestamp(value).date()

    return datetime.date.fromisoformat(str(value))


@dataclass(frozen = True)
class TravelTimeObservation:
    link: str
    date: datetime.date
    slot: str
    travel_time: float
    free_flow_time: Optional[float] = None

    def __post_init__(self):
        check_slot(self.slot, allow_whole_day = False)
        if not self.travel_time > 0:
            raise DomainValueError("Observation on {} has a nonpositive travel time".format(self.link))
        if self.free_flow_time is not None and not self.free_flow_time > 0:
            raise DomainValueError("Observation on {} has a nonpositive free flow time".format(self.link))


class ObservationPanel(object):
    """Immutable set of observations with at most one row per (link, date, slot).

    The calendar lists collection dates only; days without collection stay
    absent rather than being filled.
    """

    def __init__(self, frame):
        frame = frame.loc[:, PANEL_COLUMNS].copy()
        frame['slot'] = pd.Categorical(frame['slot'], categories = SLOT_ORDER, ordered = True)
        frame = frame.sort_values(['link_id', 'date', 'slot'], kind = 'mergesort').reset_index(drop = True)

        if frame.duplicated(['link_id', 'date', 'slot']).any():
            raise ConflictingDuplicateError("Panel holds more than one observation per (link, date, slot)")

        self._frame = frame
        self._dates = frame['date'].dt.date.to_numpy()

    @classmethod
    def from_observations(cls, observations):
        frame = pd.DataFrame({
            'link_id': [str(obs.link) for obs in observations],
            'date': pd.to_datetime([as_date(obs.date) for obs in observations]),
            'slot': [check_slot(obs.slot, allow_whole_day = False) for obs in observations],
            'travel_time_s': [float(obs.travel_time) for obs in observations],
            'free_flow_s': [np.nan if obs.free_flow_time is None else float(obs.free_flow_time) for obs in observations],
        })
        return cls(_deduplicate(frame))

    def __len__(self):
        return len(self._frame)

    def __eq__(self, other):
        return isinstance(other, ObservationPanel) and self._frame.equals(other._frame)

    @property
    def frame(self):
        # Callers get a copy, the panel itself never changes
        return self._frame.copy()

    @property
    def calendar(self):
        return sorted(set(self._dates))

    @property
    def links(self):
        return sorted(self._frame['link_id'].unique())

    def has_link(self, link_id):
        return bool((self._frame['link_id'] == link_id).any())

    def select(self, link = None, slot = None, start = None, end = None):
        mask = np.ones(len(self._frame), dtype = bool)
        if link is not None:
            mask &= (self._frame['link_id'] == link).to_numpy()

        slot = check_slot(slot)
        if slot != WHOLE_DAY:
            mask &= (self._frame['slot'] == slot).to_numpy()

        if start is not None:
            mask &= self._dates >= as_date(start)
        if end is not None:
            mask &= self._dates <= as_date(end)

        return self._frame.loc[mask]

    def values(self, link, slot = None):
        return self.select(link = link, slot = slot)['travel_time_s'].to_numpy(dtype = float)

    def observations(self, link = None, slot = None, start = None, end = None):
        rows = self.select(link = link, slot = slot, start = start, end = end)
        return [
            TravelTimeObservation(row[0], row[1].date(), str(row[2]), float(row[3]), None if np.isnan(row[4]) else float(row[4]))
            for row in rows.itertuples(index = False, name = None)
        ]

    def write(self, path):
        frame = self._frame.copy()
        frame['date'] = frame['date'].dt.strftime('%Y-%m-%d')
        frame['slot'] = frame['slot'].astype(str)

        return write_table(frame, path, PANEL_COLUMNS)


def _deduplicate(frame):
    # Identical rows collapse, rows that disagree on a key are an error
    frame = frame.drop_duplicates()
    conflicts = frame[frame.duplicated(['link_id', 'date', 'slot'], keep = False)]
    if len(conflicts) > 0:
        first = conflicts.iloc[0]
        raise ConflictingDuplicateError("Conflicting observations for link {} on {} ({})".format(
            first['link_id'], first['date'].date(), first['slot']))

    return frame


def load_panel(path):
    frame = read_table(path, REQUIRED_COLUMNS, dtype = {'link_id': str, 'slot': str, 'date': str})
    if 'free_flow_s' not in frame.columns:
        frame['free_flow_s'] = np.nan

    if frame['link_id'].isna().any():
        raise PanelSchemaError("{} has rows without a link id".format(path))

    try:
        frame['date'] = pd.to_datetime(frame['date'], format = '%Y-%m-%d')
    except (ValueError, TypeError) as exc:
        raise PanelSchemaError("{} has dates outside YYYY-MM-DD: {}".format(path, exc)) from exc

    bad_slots = sorted(set(frame['slot'].dropna()) - set(SLOT_ORDER)) + (['<empty>'] if frame['slot'].isna().any() else [])
    if len(bad_slots) > 0:
        raise PanelSchemaError("{} has unknown departure slots {}".format(path, bad_slots))

    for column in ('travel_time_s', 'free_flow_s'):
        try:
            frame[column] = pd.to_numeric(frame[column], errors = 'raise').astype(float)
        except (ValueError, TypeError) as exc:
            raise PanelSchemaError("{} column {} is not numeric".format(path, column)) from exc

    if not (frame['travel_time_s'] > 0).all():
        raise PanelSchemaError("{} has missing or nonpositive travel times".format(path))
    if (frame['free_flow_s'] <= 0).any():
        raise PanelSchemaError("{} has nonpositive free flow times".format(path))

    panel = ObservationPanel(_deduplicate(frame.loc[:, PANEL_COLUMNS]))
    logger.info("Loaded %d observations on %d links over %d days from %s",
        len(panel), len(panel.links), len(panel.calendar), path)

    return panel
