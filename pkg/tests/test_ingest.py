# Standard imports
import datetime
import json

import numpy as np
import pytest

from conftest import make_network, make_panel, random_panel, write_text
from travel_od.ingest import (DepartureSlot, adapt_provider_file, adapt_provider_response, load_panel, reliability_report, unique_update_count,
    write_observations, write_reliability_report)
from travel_od.network import SegmentMapping
from travel_od.utils.errors import AdapterError, ConflictingDuplicateError, DomainValueError, EmptyReportError, MissingLinkError, PanelSchemaError

HEADER = 'link_id,date,slot,travel_time_s,free_flow_s\n'


def test_panel_distinct_rows(tmp_path):
    path = write_text(tmp_path / 'obs.csv', HEADER +
        'a,2022-03-01,morning,100,\n'
        'a,2022-03-01,evening,110,\n'
        'b,2022-03-01,morning,90,80\n')

    panel = load_panel(path)

    assert len(panel) == 3
    assert panel.links == ['a', 'b']
    assert panel.calendar == [datetime.date(2022, 3, 1)]
    assert panel.observations(link = 'b')[0].free_flow_time == 80.0


def test_panel_identical_rows_collapse(tmp_path):
    path = write_text(tmp_path / 'obs.csv', HEADER + 'a,2022-03-01,morning,100,\n' * 2)

    assert len(load_panel(path)) == 1


def test_panel_conflicting_rows(tmp_path):
    path = write_text(tmp_path / 'obs.csv', HEADER + 'a,2022-03-01,morning,100,\na,2022-03-01,morning,120,\n')

    with pytest.raises(ConflictingDuplicateError):
        load_panel(path)


@pytest.mark.parametrize('row', [
    'a,2022-03-01,morning,0,\n',
    'a,2022-03-01,night,100,\n',
    'a,01.03.2022,morning,100,\n',
    'a,2022-03-01,morning,fast,\n',
])
def test_panel_schema_errors(tmp_path, row):
    path = write_text(tmp_path / 'obs.csv', HEADER + row)

    with pytest.raises(PanelSchemaError):
        load_panel(path)


def test_panel_missing_column(tmp_path):
    path = write_text(tmp_path / 'obs.csv', 'link_id,date,travel_time_s\na,2022-03-01,100\n')

    with pytest.raises(PanelSchemaError):
        load_panel(path)


def test_panel_reload_is_idempotent(tmp_path, sample_dir):
    panel = load_panel(sample_dir + '/observations.csv')

    first = panel.write(str(tmp_path / 'first.csv'))
    reloaded = load_panel(first)
    second = reloaded.write(str(tmp_path / 'second.csv'))

    assert reloaded == panel
    assert open(first, 'rb').read() == open(second, 'rb').read()


def test_panel_keeps_collection_gaps(sample_dir):
    panel = load_panel(sample_dir + '/observations.csv')
    calendar = panel.calendar

    assert datetime.date(2022, 3, 10) not in calendar
    assert calendar[0] == datetime.date(2022, 2, 17)
    assert calendar[-1] == datetime.date(2022, 4, 7)
    assert len(calendar) == 28


@pytest.mark.parametrize('values, expected', [
    ([10.0, 10.0, 12.0], 2),
    ([10.00, 10.04], 1),
    ([float(value) for value in range(1, 37)], 36),
])
def test_unique_update_count(values, expected):
    panel = make_panel([('a', datetime.date(2022, 3, 1) + datetime.timedelta(days = idx), 'morning', value)
        for idx, value in enumerate(values)])

    assert unique_update_count(panel, 'a') == expected


def test_unique_update_count_missing_link():
    panel = make_panel([('a', '2022-03-01', 'morning', 10.0)])

    with pytest.raises(MissingLinkError):
        unique_update_count(panel, 'b')


def test_unique_update_count_per_slot():
    panel = make_panel([('a', '2022-03-01', 'morning', 10.0), ('a', '2022-03-01', 'evening', 12.0)])

    assert unique_update_count(panel, 'a') == 2
    assert unique_update_count(panel, 'a', slot = 'morning') == 1


def short_and_long_network(mode = 'city'):
    return make_network([
        ('short', '1', '2', 80.0, 6.0, 900.0),
        ('mid', '2', '3', 400.0, 30.0, 900.0),
        ('long', '3', '4', 600.0, 40.0, 900.0),
    ], mode = mode)


def test_reliability_length_filter():
    network = short_and_long_network()
    panel = make_panel([(link, '2022-03-01', 'morning', 10.0) for link in ('short', 'mid', 'long')])

    report = reliability_report(panel, network, 100.0)
    assert report.link_ids == ('long', 'mid')

    report = reliability_report(panel, network, 500.0)
    assert report.link_ids == ('long',)


def test_reliability_normalized_histogram():
    network = short_and_long_network()
    rows = [(link, datetime.date(2022, 3, 1) + datetime.timedelta(days = idx), 'morning', 10.0 + idx)
        for link in ('mid', 'long') for idx in range(5)]

    report = reliability_report(make_panel(rows), network, 100.0)

    assert report.bins == (1, 2, 3, 4, 5)
    assert report.links_per_bin == (0, 0, 0, 0, 2)
    assert report.probability[4] == 1.0


def test_reliability_matches_brute_force_counts():
    network = make_network([('l{}'.format(idx), str(idx), str(idx + 1), 250.0, 20.0, 900.0) for idx in range(8)])
    panel = random_panel(['l{}'.format(idx) for idx in range(8)], days = 20, seed = 3)

    report = reliability_report(panel, network, 100.0)

    for link_id in report.link_ids:
        values = panel.values(link_id)
        brute = len(set(int(np.rint(value / 0.1)) for value in values))
        assert report.count_for(link_id) == brute

    assert sum(report.probability) == pytest.approx(1.0)


def test_reliability_empty_and_invalid():
    network = short_and_long_network()
    panel = make_panel([('short', '2022-03-01', 'morning', 10.0)])

    with pytest.raises(EmptyReportError):
        reliability_report(panel, network, 100.0)
    with pytest.raises(DomainValueError):
        reliability_report(panel, network, 0.0)


def test_reliability_files(tmp_path):
    network = short_and_long_network()
    panel = make_panel([('long', '2022-03-01', 'morning', 10.0)])

    links_path, histogram_path = write_reliability_report(reliability_report(panel, network, 100.0), str(tmp_path))

    assert open(links_path).read().splitlines()[0] == 'link_id,length_m,unique_count'
    assert open(histogram_path).read().splitlines()[0] == 'count,links,probability'


@pytest.fixture
def mapping(cfg):
    network = short_and_long_network()
    return SegmentMapping(network, {'K': 'long'}, cfg)


def test_adapt_mapped_record(mapping, cfg):
    response = {'flowSegmentData': {'key': 'K', 'currentTravelTime': 120, 'freeFlowTravelTime': 80}}

    obs = adapt_provider_response(response, mapping, '2022-03-01', 'morning', cfg)

    assert (obs.link, obs.travel_time, obs.free_flow_time) == ('long', 120.0, 80.0)
    assert obs.date == datetime.date(2022, 3, 1)


def test_adapt_record_at_free_flow(mapping, cfg):
    obs = adapt_provider_response({'key': 'K', 'currentTravelTime': 80, 'freeFlowTravelTime': 80}, mapping, '2022-03-01', 'evening', cfg)

    assert obs.travel_time == obs.free_flow_time == 80.0


def test_adapt_missing_current_time(mapping, cfg):
    with pytest.raises(AdapterError):
        adapt_provider_response({'key': 'K', 'freeFlowTravelTime': 80}, mapping, '2022-03-01', 'morning', cfg)


def test_adapt_unmatched_key(mapping, cfg):
    response = {'key': 'other', 'currentTravelTime': 120, 'freeFlowTravelTime': 80}

    assert adapt_provider_response(response, mapping, '2022-03-01', 'morning', cfg) is None
    assert mapping.unmatched == {'other': 1}


def test_adapt_provider_file(tmp_path, mapping, cfg):
    records = [
        {'date': '2022-03-01', 'slot': 'morning', 'flowSegmentData': {'key': 'K', 'currentTravelTime': 50, 'freeFlowTravelTime': 40}},
        {'date': '2022-03-02', 'slot': 'morning', 'flowSegmentData': {'key': 'Z', 'currentTravelTime': 50, 'freeFlowTravelTime': 40}},
    ]
    path = write_text(tmp_path / 'records.jsonl', '\n'.join(json.dumps(record) for record in records) + '\n')

    observations = adapt_provider_file(path, mapping, cfg)
    assert len(observations) == 1

    written = write_observations(observations, str(tmp_path / 'adapted.csv'))
    panel = load_panel(written)
    assert panel.observations()[0].free_flow_time == 40.0


def test_adapt_provider_file_bad_line(tmp_path, mapping, cfg):
    path = write_text(tmp_path / 'records.jsonl', '{"date": "2022-03-01"\n')

    with pytest.raises(AdapterError):
        adapt_provider_file(path, mapping, cfg)


@pytest.mark.parametrize('moment, slot', [
    ('2022-03-01T07:40:00', 'morning'),
    ('2022-03-01T10:59:00', 'morning'),
    ('2022-03-01T11:01:00', 'afternoon'),
    ('2022-03-01T15:30:00', 'evening'),
    ('2022-03-01T23:00:00', 'evening'),
])
def test_nearest_departure_slot(moment, slot):
    assert DepartureSlot.nearest(datetime.datetime.fromisoformat(moment)).value == slot


def test_adapt_provider_file_bins_collection_times(tmp_path, mapping, cfg):
    records = [
        {'collected_at': '2022-03-01T12:50:00', 'flowSegmentData': {'key': 'K', 'currentTravelTime': 50, 'freeFlowTravelTime': 40}},
        {'collected_at': '2022-03-02T09:05:00', 'slot': 'evening', 'flowSegmentData': {'key': 'K', 'currentTravelTime': 60, 'freeFlowTravelTime': 40}},
    ]
    path = write_text(tmp_path / 'records.jsonl', '\n'.join(json.dumps(record) for record in records) + '\n')

    observations = adapt_provider_file(path, mapping, cfg)

    assert [(obs.date, obs.slot) for obs in observations] == [
        (datetime.date(2022, 3, 1), 'afternoon'),
        (datetime.date(2022, 3, 2), 'evening'),
    ]


def test_adapt_provider_file_bad_collection_time(tmp_path, mapping, cfg):
    path = write_text(tmp_path / 'records.jsonl', '{"collected_at": "half past nine", "key": "K"}\n')

    with pytest.raises(AdapterError):
        adapt_provider_file(path, mapping, cfg)
