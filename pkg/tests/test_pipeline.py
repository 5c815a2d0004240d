# Standard imports
import os
import types

import pytest
import yaml

from conftest import write_text
from travel_od.pipeline import OUTPUT_ENV, main, resolve_config
from travel_od.utils.config import load_run_config
from travel_od.utils.errors import ConfigError

STAGES = ['build-network', 'build-zones', 'ingest', 'reliability', 'metrics', 'assign', 'estimate', 'report']


@pytest.fixture
def sample_config(sample_dir):
    return os.path.join(sample_dir, 'run_config.yaml')


def run_command(command, config, out):
    return main([command, '--config', config, '--out', str(out)])


def arguments(config = None, out = None, seed = None, workers = None):
    return types.SimpleNamespace(config = config, out = out, seed = seed, workers = workers)


def snapshot(out):
    # Relative path to bytes for every file under the output directory, manifests without their wall time
    files = {}
    for root, _, names in os.walk(str(out)):
        for name in names:
            path = os.path.join(root, name)
            data = open(path, 'rb').read()
            if name.startswith('manifest_'):
                data = b'\n'.join(line for line in data.split(b'\n') if not line.startswith(b'wall_time_s:'))
            files[os.path.relpath(path, str(out))] = data

    return files


def test_full_run_is_reproducible(tmp_path, sample_config):
    for command in STAGES:
        assert run_command(command, sample_config, tmp_path) == 0
    first = snapshot(tmp_path)

    for command in STAGES:
        assert run_command(command, sample_config, tmp_path) == 0
    second = snapshot(tmp_path)

    assert sorted(first) == sorted(second)
    for path in first:
        assert first[path] == second[path], path

    for command in STAGES:
        assert 'manifest_{}.yaml'.format(command.replace('-', '_')) in first
    for name in ('series.csv', 'series_relative.csv', 'hue_map_cov_morning.geojson'):
        assert os.path.join('metrics', name) in first
    for name in ('od.csv', 'trace.csv', 'zonal.geojson', 'zonal.csv'):
        assert os.path.join('estimate', '2022-03-02', name) in first
    assert os.path.join('ingest', 'unmatched_segments.csv') in first
    assert os.path.join('report', 'zonal_changes.csv') in first

    manifest = yaml.safe_load(open(tmp_path / 'manifest_metrics.yaml'))
    assert manifest['command'] == 'metrics'
    assert manifest['seed'] == 7
    assert manifest['wall_time_s'] >= 0
    assert 'metrics/series.csv' in [output['path'] for output in manifest['outputs']]

    # Two compared dates for each of the nine zones
    assert len(first[os.path.join('report', 'zonal_changes.csv')].splitlines()) == 1 + 2 * 9


def test_estimate_without_artifacts_fails(tmp_path, sample_config):
    assert run_command('estimate', sample_config, tmp_path) == 2


def test_report_from_written_statistics(tmp_path, sample_config):
    write_text(tmp_path / 'estimate' / 'stats.csv',
        'date,avg_trip_length_m,avg_travel_time_s,total_demand\n'
        '2022-02-28,10000.0,1000.0,10000.0\n'
        '2022-03-16,9448.0,997.2,10390.0\n')

    assert run_command('report', sample_config, tmp_path) == 0

    lines = open(tmp_path / 'report' / 'comparison.csv').read().splitlines()
    assert lines[1] == 'Kyiv,2022-02-28,-,-,-'
    assert lines[2] == 'Kyiv,2022-03-16,-5.52,-0.28,+3.90'


def test_report_zonal_changes_from_estimated_matrices(tmp_path, sample_config):
    for command in ('build-network', 'build-zones'):
        assert run_command(command, sample_config, tmp_path) == 0

    write_text(tmp_path / 'estimate' / 'stats.csv',
        'date,avg_trip_length_m,avg_travel_time_s,total_demand\n'
        '2022-02-28,1000.0,100.0,150.0\n'
        '2022-03-16,1000.0,100.0,140.0\n')
    write_text(tmp_path / 'estimate' / '2022-02-28' / 'od.csv', 'origin_zone,dest_zone,trips\n1,2,100\n2,1,50\n')
    write_text(tmp_path / 'estimate' / '2022-02-28' / 'zonal.csv', 'zone_id,dest_ci\n1,1.2\n2,1.5\n')
    write_text(tmp_path / 'estimate' / '2022-03-16' / 'od.csv', 'origin_zone,dest_zone,trips\n1,2,80\n2,1,50\n3,1,10\n')
    write_text(tmp_path / 'estimate' / '2022-03-16' / 'zonal.csv', 'zone_id,dest_ci\n1,1.5\n2,1.5\n')

    assert run_command('report', sample_config, tmp_path) == 0

    lines = open(tmp_path / 'report' / 'zonal_changes.csv').read().splitlines()
    assert lines[0] == 'date,zone_id,delta_production_pct,delta_attraction_pct,delta_dest_ci_pct'
    assert lines[1] == '2022-03-16,1,-20.00,+20.00,+25.00'
    assert lines[2] == '2022-03-16,2,+0.00,-20.00,+0.00'
    assert lines[3] == '2022-03-16,3,n/a,n/a,n/a'
    assert len(lines) == 10

    manifest = yaml.safe_load(open(tmp_path / 'manifest_report.yaml'))
    assert 'report/zonal_changes.csv' in [output['path'] for output in manifest['outputs']]


def test_report_without_base_date_statistics(tmp_path, sample_config):
    write_text(tmp_path / 'estimate' / 'stats.csv',
        'date,avg_trip_length_m,avg_travel_time_s,total_demand\n'
        '2022-03-16,9448.0,997.2,10390.0\n')

    assert run_command('report', sample_config, tmp_path) == 2


def test_output_dir_precedence(tmp_path, monkeypatch, sample_config):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / 'from_env'))

    assert resolve_config(arguments(sample_config, out = str(tmp_path / 'from_flag'))).run.output_dir == str(tmp_path / 'from_flag')
    assert resolve_config(arguments(sample_config)).run.output_dir == str(tmp_path / 'from_env')

    monkeypatch.delenv(OUTPUT_ENV)
    assert resolve_config(arguments(sample_config)).run.output_dir == 'travel_od_output'


def test_seed_and_workers_flags(sample_config):
    cfg = resolve_config(arguments(sample_config, out = 'out', seed = 11, workers = 2))

    assert (cfg.run.seed, cfg.run.workers) == (11, 2)


def test_relative_paths_follow_the_config_file(sample_dir, sample_config):
    cfg = load_run_config(sample_config)

    assert cfg.network.osm_path == os.path.join(sample_dir, 'grid.osm')
    assert cfg.assign.od_path == os.path.join(sample_dir, 'od.csv')
    assert cfg.network.zoning.rows == 3


def test_invalid_configs(tmp_path):
    with pytest.raises(ConfigError):
        load_run_config(str(tmp_path / 'missing.yaml'))

    path = write_text(tmp_path / 'broken.yaml', 'network: [unclosed\n')
    with pytest.raises(ConfigError):
        load_run_config(path)

    path = write_text(tmp_path / 'zero_rows.yaml', 'network:\n  zoning:\n    rows: 0\n')
    with pytest.raises(ConfigError):
        resolve_config(arguments(path, out = str(tmp_path)))

    path = write_text(tmp_path / 'missing_input.yaml', "assign:\n  od_path: 'nowhere.csv'\n")
    with pytest.raises(ConfigError):
        resolve_config(arguments(path, out = str(tmp_path)))


def test_unknown_command_exits():
    with pytest.raises(SystemExit):
        main(['unknown'])
