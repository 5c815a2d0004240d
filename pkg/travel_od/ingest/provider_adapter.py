# Standard imports
import json
import logging

import numpy as np
import pandas as pd

from travel_od.ingest.panel import PANEL_COLUMNS, DepartureSlot, TravelTimeObservation, as_date, check_slot
from travel_od.utils.config import section
from travel_od.utils.errors import AdapterError, DomainValueError
from travel_od.utils.tables import write_table

logger = logging.getLogger(__name__)


def _number(record, field, key):
    if field not in record or record[field] is None:
        raise AdapterError("Provider record {} has no {} field".format(key, field))

    try:
        return float(record[field])
    except (TypeError, ValueError) as exc:
        raise AdapterError("Provider record {} field {} is not numeric: {}".format(key, field, record[field])) from exc


def adapt_provider_response(response, mapping, date, slot, cfg = None):
    """Turns one provider segment-flow record into an observation.

    Returns None when the segment key cannot be resolved to a link; the key is
    then counted in the mapping's unmatched report.
    """
    fields = section(cfg, 'ingest').provider_fields

    # Provider responses wrap the record in a flowSegmentData envelope
    record = response.get('flowSegmentData', response) if isinstance(response, dict) else None
    if not isinstance(record, dict):
        raise AdapterError("Provider response is not a JSON object")

    if fields.key not in record or record[fields.key] in (None, ''):
        raise AdapterError("Provider record has no {} field".format(fields.key))

    key = str(record[fields.key])
    current = _number(record, fields.current, key)
    free_flow = _number(record, fields.free_flow, key)

    link_id = mapping.link_lookup(key, record.get(fields.coordinates))
    if link_id is None:
        return None

    try:
        return TravelTimeObservation(link_id, as_date(date), check_slot(slot, allow_whole_day = False), current, free_flow)
    except DomainValueError as exc:
        raise AdapterError("Provider record {}: {}".format(key, exc)) from exc


def adapt_provider_file(path, mapping, cfg = None):
    """Adapts a JSON-lines file of provider records.

    Each record carries a date and slot, or a `collected_at` timestamp that is
    binned to the departure slot with the nearest nominal clock time.
    """
    observations = []
    with open(path, 'r') as file:
        for line_number, line in enumerate(file, start = 1):
            if not line.strip():
                continue

            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise AdapterError("{} line {} is not valid JSON: {}".format(path, line_number, exc)) from exc

            if 'collected_at' in record and ('date' not in record or 'slot' not in record):
                try:
                    moment = pd.Timestamp(record['collected_at'])
                except (TypeError, ValueError) as exc:
                    raise AdapterError("{} line {} has an unreadable collected_at {}".format(
                        path, line_number, record['collected_at'])) from exc
                record.setdefault('date', moment.date().isoformat())
                record.setdefault('slot', DepartureSlot.nearest(moment).value)

            if 'date' not in record or 'slot' not in record:
                raise AdapterError("{} line {} lacks a date or slot".format(path, line_number))

            try:
                observation = adapt_provider_response(record, mapping, record['date'], record['slot'], cfg)
            except (DomainValueError, ValueError) as exc:
                raise AdapterError("{} line {}: {}".format(path, line_number, exc)) from exc

            if observation is not None:
                observations.append(observation)

    logger.info("Adapted %d provider records from %s, %d segment keys unmatched",
        len(observations), path, len(mapping.unmatched))

    return observations


def observations_frame(observations):
    return pd.DataFrame({
        'link_id': [obs.link for obs in observations],
        'date': [obs.date.isoformat() for obs in observations],
        'slot': [obs.slot for obs in observations],
        'travel_time_s': [obs.travel_time for obs in observations],
        'free_flow_s': [np.nan if obs.free_flow_time is None else obs.free_flow_time for obs in observations],
    }, columns = PANEL_COLUMNS)


def write_observations(observations, path):
    return write_table(observations_frame(observations), path, PANEL_COLUMNS)
