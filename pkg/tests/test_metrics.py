# Standard imports
import datetime
import json

import numpy as np
import pytest

from conftest import day, make_network, make_panel, write_text
from travel_od.ingest import TravelTimeObservation, load_panel
from travel_od.metrics import (WindowSpec, annotate, hue_map, link_ci, link_cov, load_timeline, moving_series, network_ci,
    network_cov, relative_change, study_period_cov, write_geojson, write_series)
from travel_od.metrics.series import MetricSeries
from travel_od.metrics.timeline import EventTimeline, TimelineEvent
from travel_od.network import parse_network
from travel_od.network.elements import BoundingBox
from travel_od.utils.errors import (DomainValueError, EmptyValuesError, MissingFreeFlowError, UndefinedDayError, UndefinedDeltaError,
    UndefinedWindowError, UnknownCityError)

ANCHOR = datetime.date(2022, 3, 7)


def two_link_network():
    return make_network([('a', '1', '2', 500.0, 80.0, 900.0), ('b', '2', '3', 500.0, 80.0, 900.0)])


def week(link, values, slot = 'morning', anchor = ANCHOR):
    start = anchor - datetime.timedelta(days = len(values) - 1)
    return [(link, start + datetime.timedelta(days = idx), slot, value) for idx, value in enumerate(values)]


def test_window_bounds():
    window = WindowSpec('2022-03-07', 7)

    assert window.start == datetime.date(2022, 3, 1)
    assert window.contains('2022-03-01') and window.contains(ANCHOR)
    assert not window.contains('2022-02-28')
    with pytest.raises(DomainValueError):
        WindowSpec(ANCHOR, 0)


def test_link_cov_constant_week():
    panel = make_panel(week('a', [100.0] * 7))

    result = link_cov(panel, 'a', 'morning', WindowSpec(ANCHOR))
    assert result.cov == 0.0
    assert result.sample_size == 7


def test_link_cov_population_std():
    panel = make_panel(week('a', [90.0, 110.0]))

    result = link_cov(panel, 'a', 'morning', WindowSpec(ANCHOR))
    assert (result.mean, result.std) == (100.0, 10.0)
    assert result.cov == pytest.approx(0.10)


def test_link_cov_single_observation_is_undefined():
    panel = make_panel(week('a', [90.0]))

    assert link_cov(panel, 'a', 'morning', WindowSpec(ANCHOR)) is None


def test_link_cov_matches_numpy_oracle():
    rng = np.random.default_rng(11)
    values = list(np.round(rng.uniform(50.0, 150.0, 7), 1))
    panel = make_panel(week('a', values))

    expected = np.std(values) / np.mean(values)
    assert link_cov(panel, 'a', 'morning', WindowSpec(ANCHOR)).cov == pytest.approx(expected)


def test_network_cov_mean_of_links():
    # cov 0.2 and 0.4
    panel = make_panel(week('a', [80.0, 120.0]) + week('b', [60.0, 140.0]))

    result = network_cov(panel, two_link_network(), 'morning', WindowSpec(ANCHOR))
    assert result.value == pytest.approx(0.3)
    assert result.n == 2


def test_network_cov_skips_undefined_links():
    panel = make_panel(week('a', [80.0, 120.0]) + week('b', [60.0]))

    result = network_cov(panel, two_link_network(), 'morning', WindowSpec(ANCHOR))
    assert result.value == pytest.approx(0.2)
    assert result.n == 1


def test_network_cov_constant_links():
    panel = make_panel(week('a', [100.0] * 3) + week('b', [50.0] * 3))

    assert network_cov(panel, two_link_network(), 'morning', WindowSpec(ANCHOR)).value == 0.0


def test_network_cov_undefined_window():
    panel = make_panel(week('a', [100.0]))

    with pytest.raises(UndefinedWindowError):
        network_cov(panel, two_link_network(), 'morning', WindowSpec(ANCHOR))


def test_network_cov_whole_day_pools_slots():
    panel = make_panel(week('a', [90.0], slot = 'morning') + week('a', [110.0], slot = 'evening'))

    with pytest.raises(UndefinedWindowError):
        network_cov(panel, two_link_network(), 'morning', WindowSpec(ANCHOR))
    assert network_cov(panel, two_link_network(), 'whole_day', WindowSpec(ANCHOR)).value == pytest.approx(0.1)


@pytest.mark.parametrize('travel_time, expected', [(80.0, 1.0), (120.0, 1.5), (60.0, 0.75)])
def test_link_ci_ratio(travel_time, expected):
    obs = TravelTimeObservation('a', ANCHOR, 'morning', travel_time, 80.0)

    assert link_ci(obs, two_link_network()).index == pytest.approx(expected)


def test_link_ci_flags_sub_free_flow(caplog):
    obs = TravelTimeObservation('a', ANCHOR, 'morning', 60.0, 80.0)

    with caplog.at_level('WARNING', logger = 'travel_od.quality'):
        link_ci(obs, two_link_network())
    assert any('faster than free flow' in record.message for record in caplog.records)


def test_link_ci_free_flow_fallback():
    network = two_link_network()

    # Network free flow of link a is 80 s
    assert link_ci(TravelTimeObservation('a', ANCHOR, 'morning', 120.0), network).index == pytest.approx(1.5)
    with pytest.raises(MissingFreeFlowError):
        link_ci(TravelTimeObservation('zz', ANCHOR, 'morning', 120.0), network)


def test_network_ci_mean_of_indexes():
    network = make_network([('a', '1', '2', 500.0, 80.0, 900.0), ('b', '2', '3', 500.0, 80.0, 900.0), ('c', '3', '4', 500.0, 50.0, 900.0)])
    panel = make_panel([('a', ANCHOR, 'morning', 80.0), ('b', ANCHOR, 'morning', 80.0), ('c', ANCHOR, 'morning', 80.0)])

    result = network_ci(panel, network, 'morning', ANCHOR)
    assert result.value == pytest.approx(1.2)
    assert result.n == 3


def test_network_ci_single_link_and_empty_day():
    panel = make_panel([('a', ANCHOR, 'morning', 100.0, 80.0)])

    assert network_ci(panel, two_link_network(), 'morning', ANCHOR).value == pytest.approx(1.25)
    with pytest.raises(UndefinedDayError):
        network_ci(panel, two_link_network(), 'morning', ANCHOR + datetime.timedelta(days = 1))


def test_constant_panel_gives_flat_series():
    rows = [(link, day(offset), 'morning', 100.0) for link in ('a', 'b') for offset in range(10)]
    panel = make_panel(rows)
    network = two_link_network()

    cov = moving_series(panel, network, 'cov', 'morning', 7)
    ci = moving_series(panel, network, 'ci', 'morning', 7)

    # The first collection day has a single observation per link
    assert cov.dates[0] == day(1)
    assert set(cov.values) == {0.0}
    assert list(ci.values) == pytest.approx([1.25] * 10)


def test_ci_series_trailing_mean():
    values = [80.0] * 6 + [160.0]
    panel = make_panel(week('a', values))

    series = moving_series(panel, two_link_network(), 'ci', 'morning', 7)

    assert series.values[-1] == pytest.approx(8.0 / 7.0)
    assert series.counts[-1] == 7


def test_series_keeps_collection_gap(sample_dir):
    panel = load_panel(sample_dir + '/observations.csv')
    network = parse_network(sample_dir + '/grid.osm', BoundingBox(30.499, 50.439, 30.515, 50.450), 'city')

    series = moving_series(panel, network, 'cov', 'morning', 7)
    gap = [date for date in series.dates if datetime.date(2022, 3, 3) <= date <= datetime.date(2022, 3, 24)]

    assert gap == []
    assert set(series.dates) <= set(panel.calendar)
    assert list(series.dates) == sorted(series.dates)

    # The first day of each collection window holds one observation per link
    assert datetime.date(2022, 2, 17) not in series.dates
    assert datetime.date(2022, 3, 25) not in series.dates
    assert series.dates[series.dates.index(datetime.date(2022, 3, 26)) - 1] == datetime.date(2022, 3, 2)

    # n counts the long enough links with two or more observations inside each window
    frame = panel.frame
    frame = frame.loc[frame['slot'] == 'morning']
    for anchor, count in zip(series.dates, series.counts):
        window = WindowSpec(anchor, 7)
        inside = frame.loc[[window.contains(date) for date in frame['date']]]
        sizes = inside.groupby('link_id').size()
        expected = sum(1 for link, size in sizes.items() if size >= 2 and network.has_link(link) and network.link(link).length >= 100.0)
        assert count == expected

    assert series.counts[series.dates.index(datetime.date(2022, 3, 26))] == series.counts[-1]


def test_series_rejects_unordered_dates():
    with pytest.raises(DomainValueError):
        MetricSeries('cov', 'morning', (day(2), day(1)), (0.1, 0.2), (1, 1))


def test_relative_change():
    series = MetricSeries('ci', 'morning', (day(0), day(1), day(2)), (1.25, 1.5, 1.0), (1, 1, 1))

    change = relative_change(series)
    assert change.values == pytest.approx((0.0, 20.0, -20.0))
    assert change.metric_label == 'ci_pct_change'

    with pytest.raises(UndefinedDeltaError):
        relative_change(MetricSeries('cov', 'morning', (day(0), day(1)), (0.0, 0.1), (1, 1)))


def test_write_series_schema(tmp_path):
    series = MetricSeries('cov', 'evening', (day(0), day(1)), (0.1, 0.2), (3, 4), ((day(1), '3'), (day(1), '4')))

    lines = open(write_series([series], str(tmp_path / 'series.csv'))).read().splitlines()

    assert lines[0] == 'date,slot,metric,value,n,annotations'
    assert lines[2] == '2022-02-26,evening,cov,0.2,4,3;4'


def kyiv_timeline():
    return EventTimeline((
        TimelineEvent('Kyiv', '1', 'Airstrikes', datetime.date(2022, 2, 24), datetime.date(2022, 2, 24)),
        TimelineEvent('Kyiv', '3', 'Curfew', datetime.date(2022, 2, 26), datetime.date(2022, 2, 28)),
        TimelineEvent('Kyiv', '9', 'Deoccupation', datetime.date(2022, 4, 2), datetime.date(2022, 4, 2)),
    ))


def daily_series(start, days):
    dates = tuple(start + datetime.timedelta(days = idx) for idx in range(days))
    return MetricSeries('cov', 'morning', dates, (0.1,) * days, (1,) * days)


def test_annotate_event_inside_span():
    series = annotate(daily_series(datetime.date(2022, 3, 30), 5), kyiv_timeline(), 'Kyiv')

    assert series.annotations == ((datetime.date(2022, 4, 2), '9'),)


def test_annotate_curfew_range():
    series = annotate(daily_series(datetime.date(2022, 2, 25), 6), kyiv_timeline(), 'kyiv')

    assert series.refs_on(datetime.date(2022, 2, 25)) == []
    for offset in (26, 27, 28):
        assert series.refs_on(datetime.date(2022, 2, offset)) == ['3']


def test_annotate_event_outside_span():
    series = annotate(daily_series(datetime.date(2022, 3, 5), 5), kyiv_timeline(), 'Kyiv')

    assert series.annotations == ()


def test_annotate_unknown_city():
    with pytest.raises(UnknownCityError):
        annotate(daily_series(datetime.date(2022, 3, 5), 5), kyiv_timeline(), 'Atlantis')


def test_sample_timeline(sample_dir):
    timeline = load_timeline(sample_dir + '/event_timeline.csv')

    assert timeline.cities == ['Dnipro', 'Kharkiv', 'Kyiv', 'Lviv', 'Mariupol', 'Odesa']
    siege = [event for event in timeline.for_city('Mariupol') if event.ref == '-'][0]
    assert siege.end is None
    assert siege.last_day == datetime.date.max


def test_timeline_rejects_reversed_range(tmp_path):
    path = write_text(tmp_path / 'timeline.csv',
        'city,ref,description,start_date,end_date\nKyiv,1,Curfew,2022-03-17,2022-03-15\n')

    with pytest.raises(DomainValueError):
        load_timeline(path)


def test_hue_map_positions_and_omission(tmp_path):
    network = make_network([('a', '1', '2', 500.0, 80.0, 900.0), ('b', '2', '3', 500.0, 80.0, 900.0), ('c', '3', '4', 500.0, 80.0, 900.0)])

    document = hue_map(network, {'a': 0.1, 'b': 0.5})
    features = {feature['properties']['link_id']: feature for feature in document['features']}

    assert sorted(features) == ['a', 'b']
    assert features['a']['properties']['hue01'] == 0.0
    assert features['b']['properties']['hue01'] == 1.0
    assert features['a']['geometry']['coordinates'][0] == [30.0, 50.0]
    assert features['b']['properties']['color'].startswith('#')

    path = write_geojson(document, str(tmp_path / 'map.geojson'))
    assert json.load(open(path)) == document


def test_hue_map_flat_values():
    document = hue_map(two_link_network(), {'a': 0.3, 'b': 0.3})

    assert [feature['properties']['hue01'] for feature in document['features']] == [0.5, 0.5]


def test_hue_map_empty_values():
    with pytest.raises(EmptyValuesError):
        hue_map(two_link_network(), {})


def test_study_period_cov():
    panel = make_panel(week('a', [80.0, 120.0]) + week('b', [60.0]))

    assert study_period_cov(panel, two_link_network(), 'morning') == {'a': pytest.approx(0.2)}


def three_length_network():
    # 50 m, 150 m and 600 m links
    return make_network([('s', '1', '2', 50.0, 10.0, 900.0), ('m', '2', '3', 150.0, 20.0, 900.0), ('l', '3', '4', 600.0, 60.0, 900.0)])


def random_rows(rng, links = ('s', 'm', 'l'), days = 7):
    # Each link is observed on a random subset of the week
    rows = []
    for link in links:
        for offset in range(days):
            if rng.random() < 0.7:
                rows.append((link, ANCHOR - datetime.timedelta(days = offset), 'morning', float(np.round(rng.uniform(5.0, 200.0), 1))))

    return rows


def test_network_metrics_match_numpy_oracle():
    network = three_length_network()
    rng = np.random.default_rng(5)
    window = WindowSpec(ANCHOR)

    for _ in range(200):
        rows = random_rows(rng)
        if len(rows) == 0:
            continue
        panel = make_panel(rows)

        covs = []
        for link in ('m', 'l'):
            values = np.array([row[3] for row in rows if row[0] == link])
            if len(values) >= 2:
                covs.append(np.std(values) / np.mean(values))
        if covs:
            result = network_cov(panel, network, 'morning', window, 100.0)
            assert result.value == pytest.approx(np.mean(covs), rel = 1e-12)
            assert result.n == len(covs)
        else:
            with pytest.raises(UndefinedWindowError):
                network_cov(panel, network, 'morning', window, 100.0)

        indexes = [row[3] / network.link(row[0]).free_flow_time for row in rows if row[0] != 's' and row[1] == ANCHOR]
        if indexes:
            assert network_ci(panel, network, 'morning', ANCHOR, 100.0).value == pytest.approx(np.mean(indexes), rel = 1e-12)
        else:
            with pytest.raises(UndefinedDayError):
                network_ci(panel, network, 'morning', ANCHOR, 100.0)


def test_cov_is_scale_invariant():
    network = three_length_network()
    rows = random_rows(np.random.default_rng(8), days = 7)
    scaled = [(link, date, slot, value * 3.7) for link, date, slot, value in rows]

    original = network_cov(make_panel(rows), network, 'morning', WindowSpec(ANCHOR), 0.0)
    stretched = network_cov(make_panel(scaled), network, 'morning', WindowSpec(ANCHOR), 0.0)

    assert stretched.value == pytest.approx(original.value, rel = 1e-12)
    assert stretched.n == original.n


def test_shifted_window_membership():
    window = WindowSpec(ANCHOR, 7)

    for days in (-10, -1, 0, 3, 9):
        shifted = window.shifted(days)
        assert shifted.width == window.width
        for offset in range(-20, 20):
            date = ANCHOR + datetime.timedelta(days = offset)
            assert shifted.contains(date) == window.contains(date - datetime.timedelta(days = days))


def test_length_filter_is_monotone():
    network = three_length_network()
    panel = make_panel([(link, ANCHOR - datetime.timedelta(days = offset), 'morning', 20.0 + offset * (idx + 1))
        for idx, link in enumerate(('s', 'm', 'l')) for offset in range(7)])

    counts = []
    for min_length in (0.0, 50.0, 100.0, 150.0, 300.0, 600.0):
        counts.append(network_cov(panel, network, 'morning', WindowSpec(ANCHOR), min_length).n)
        assert network_ci(panel, network, 'morning', ANCHOR, min_length).n == counts[-1]

    assert counts == sorted(counts, reverse = True)
    assert counts == [3, 3, 2, 2, 1, 1]
    with pytest.raises(UndefinedWindowError):
        network_cov(panel, network, 'morning', WindowSpec(ANCHOR), 601.0)


def test_series_points_pair_dates_and_values():
    series = MetricSeries('cov', 'morning', (day(0), day(2)), (0.1, 0.3), (4, 5))

    assert series.points == [(day(0), 0.1), (day(2), 0.3)]


def test_network_ci_logs_unknown_links(caplog):
    panel = make_panel([('a', ANCHOR, 'morning', 100.0), ('x', ANCHOR, 'morning', 90.0), ('y', ANCHOR, 'morning', 90.0)])

    with caplog.at_level('WARNING', logger = 'travel_od.quality'):
        result = network_ci(panel, two_link_network(), 'morning', ANCHOR)

    assert result.n == 1
    assert any('2 observations' in record.message and 'missing from the network' in record.message for record in caplog.records)
