# Standard imports
import datetime
import logging
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np
import pandas as pd

from travel_od.metrics.hue_map import write_geojson
from travel_od.utils.errors import DomainValueError, UndefinedSharesError
from travel_od.utils.tables import write_table

logger = logging.getLogger(__name__)

DELTA_FIELDS = [
    ('avg_trip_length', '% change in average trip length'),
    ('avg_travel_time', '% change in average travel time'),
    ('total_demand', '% change in total demand'),
]
COMPARISON_COLUMNS = ['city', 'date', 'delta_trip_length_pct', 'delta_travel_time_pct', 'delta_total_demand_pct']
BASE_MARK = '-'
UNDEFINED_MARK = 'n/a'
FOOTER = 'Average travel time is demand weighted over all assigned trips.'
ZONAL_COLUMNS = ['zone_id', 'production', 'attraction', 'production_share_pct', 'dest_ci']
ZONAL_CHANGE_COLUMNS = ['date', 'zone_id', 'delta_production_pct', 'delta_attraction_pct', 'delta_dest_ci_pct']


def format_delta(value):
    # Sign always shown, a rounded zero reads +0.00
    text = '{:+.2f}'.format(value)
    return '+0.00' if text == '-0.00' else text


@dataclass(frozen = True)
class ComparisonRow:
    date: datetime.date
    deltas: Optional[Tuple[Optional[float], ...]]

    @property
    def cells(self):
        if self.deltas is None:
            return [BASE_MARK] * len(DELTA_FIELDS)
        return [UNDEFINED_MARK if value is None else format_delta(value) for value in self.deltas]


@dataclass(frozen = True)
class ComparisonReport:
    city: str
    base_date: Optional[datetime.date]
    rows: Tuple[ComparisonRow, ...]

    def to_frame(self):
        return pd.DataFrame(
            [[self.city, '' if row.date is None else str(row.date)] + row.cells for row in self.rows],
            columns = COMPARISON_COLUMNS
        )

    def render(self):
        header = ['City', 'Date'] + [label for _, label in DELTA_FIELDS]
        body = [[self.city if idx == 0 else '', '' if row.date is None else str(row.date)] + row.cells
                for idx, row in enumerate(self.rows)]

        widths = [max(len(line[col]) for line in [header] + body) for col in range(len(header))]
        lines = ['  '.join(cell.ljust(width) if col < 2 else cell.rjust(width) for col, (cell, width) in enumerate(zip(line, widths))).rstrip()
                 for line in [header] + body]
        lines.insert(1, '  '.join('-' * width for width in widths))
        lines.append('')
        lines.append(FOOTER)

        return '\n'.join(lines) + '\n'


def percent_change(base, value):
    # None when the base is zero or missing
    if base is None or value is None or np.isnan(base) or np.isnan(value) or base == 0:
        return None

    return 100.0 * (value - base) / base


def compare_days(base, others, city = '', base_date = None):
    """Percent change of each day's statistics against the base day.

    A zero base component leaves only its own column undefined.
    """
    for name, _ in DELTA_FIELDS:
        if getattr(base, name) == 0:
            logger.warning("Base %s is zero, its percent change is undefined", name)

    rows = [ComparisonRow(base_date, None)]
    for date, stats in others:
        deltas = tuple(percent_change(getattr(base, name), getattr(stats, name)) for name, _ in DELTA_FIELDS)
        rows.append(ComparisonRow(date, deltas))

    return ComparisonReport(city, base_date, tuple(rows))


def write_comparison(report, csv_path, text_path):
    write_table(report.to_frame(), csv_path, COMPARISON_COLUMNS)
    with open(text_path, 'w') as file:
        file.write(report.render())

    return [csv_path, text_path]


def zone_production_shares(od):
    total = od.total
    if not total > 0:
        raise UndefinedSharesError("Production shares need a positive total demand")

    shares = 100.0 * od.productions / total
    return {zone_id: float(share) for zone_id, share in zip(od.zones.ids, shares)}


def destination_congestion_index(result, od, zones, network):
    """Flow weighted mean link congestion index on the paths into each zone.

    Zones that attract no trips are left out.
    """
    if result.destination_flows is None:
        raise DomainValueError("Assignment was run without destination flows")

    fft = network.arrays['free_flow_time']
    link_ci = result.times / fft
    attractions = od.attractions

    indexes = {}
    for idx, zone in enumerate(zones.zones):
        flows = result.destination_flows[idx]
        weight = float(flows.sum())
        if attractions[idx] <= 0 or weight <= 0:
            continue
        indexes[zone.id] = float(np.dot(flows, link_ci) / weight)

    return indexes


@dataclass(frozen = True)
class ZonalReport:
    production_share: Dict[int, float]
    dest_ci: Dict[int, float]


def zonal_report(result, od, zones, network):
    return ZonalReport(zone_production_shares(od), destination_congestion_index(result, od, zones, network))


def zonal_geojson(report, zones):
    features = []
    for zone in zones.zones:
        features.append({
            'type': 'Feature',
            'geometry': {'type': 'Polygon', 'coordinates': [zones.cell_polygon(zone)]},
            'properties': {
                'zone_id': zone.id,
                'centroid': zone.centroid,
                'production_share_pct': report.production_share.get(zone.id, 0.0),
                'dest_ci': report.dest_ci.get(zone.id),
            },
        })

    return {'type': 'FeatureCollection', 'features': features}


def write_zonal_report(report, zones, path):
    return write_geojson(zonal_geojson(report, zones), path)


def zonal_totals(od, dest_ci):
    # Production, attraction and destination CI per zone, NaN CI for zones without one
    return pd.DataFrame({
        'zone_id': list(od.zones.ids),
        'production': [float(value) for value in od.productions],
        'attraction': [float(value) for value in od.attractions],
        'dest_ci': [dest_ci.get(zone_id, np.nan) for zone_id in od.zones.ids],
    }, columns = ['zone_id', 'production', 'attraction', 'dest_ci'])


def zonal_frame(report, od):
    # Per zone totals of one estimated day, read back by the report command
    frame = zonal_totals(od, report.dest_ci)
    frame['production_share_pct'] = [report.production_share.get(zone_id, 0.0) for zone_id in od.zones.ids]
    return frame.loc[:, ZONAL_COLUMNS]


def write_zonal_table(report, od, path):
    return write_table(zonal_frame(report, od), path, ZONAL_COLUMNS)


def zonal_changes(base, others):
    """Per zone percent change of production, attraction and destination CI.

    `base` and each entry of `others` after its date are `zonal_totals`
    frames. Cells whose base value is zero or missing read n/a.
    """
    base = base.set_index('zone_id')
    rows = []
    for date, frame in others:
        frame = frame.set_index('zone_id')
        for zone_id in base.index:
            cells = [str(date), int(zone_id)]
            for column in ('production', 'attraction', 'dest_ci'):
                value = float(frame.at[zone_id, column]) if zone_id in frame.index else None
                delta = percent_change(float(base.at[zone_id, column]), value)
                cells.append(UNDEFINED_MARK if delta is None else format_delta(delta))
            rows.append(cells)

    undefined = sum(row.count(UNDEFINED_MARK) for row in rows)
    if undefined > 0:
        logger.info("%d zonal changes are undefined against a zero or missing base value", undefined)

    return pd.DataFrame(rows, columns = ZONAL_CHANGE_COLUMNS)


def write_zonal_changes(frame, path):
    return write_table(frame, path, ZONAL_CHANGE_COLUMNS)
