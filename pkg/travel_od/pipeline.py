"""Command line entry point of the disruption analysis pipeline.

Each command is one stage that reads the artifacts of the stages before it
from the output directory and writes its own, plus a manifest_<command>.yaml.
"""

# Standard imports
import argparse
import json
import logging
import os
import platform
import sys
import time
from importlib import metadata

import pandas as pd
import yaml
from omegaconf import OmegaConf

from travel_od import __version__
from travel_od.assign_core import NetworkStats, UserEquilibriumSolver, VdfParams, load_od, network_stats, write_od
from travel_od.estimate import (GaConfig, compare_days, estimate_od, observed_times, write_comparison, write_trace, write_zonal_changes,
    write_zonal_report, write_zonal_table, zonal_changes, zonal_report, zonal_totals)
from travel_od.ingest import adapt_provider_file, load_panel, reliability_report, write_observations, write_reliability_report
from travel_od.metrics import annotate, hue_map, load_timeline, moving_series, relative_change, study_period_cov, write_geojson, write_series
from travel_od.network import BoundingBox, SegmentMapping, build_zones, load_network, load_zones, parse_network, write_network, write_zones
from travel_od.utils.config import load_run_config, validate_run_config
from travel_od.utils.errors import ConfigError, MissingArtifactError, TravelOdError, UndefinedDeltaError
from travel_od.utils.logs import setup_logging
from travel_od.utils.tables import file_sha256, read_table, write_table

logger = logging.getLogger(__name__)

OUTPUT_ENV = 'TRAVEL_OD_OUTPUT_DIR'
STATS_COLUMNS = ['date', 'avg_trip_length_m', 'avg_travel_time_s', 'total_demand']
LIBRARIES = ['numpy', 'pandas', 'scipy', 'networkx', 'osmium', 'hydra-core', 'omegaconf', 'PyYAML', 'matplotlib']


class PipelineRunner(object):
    def __init__(self, cfg, output_dir, workers = 1):
        self.cfg = cfg
        self.output_dir = output_dir
        self.workers = int(workers)
        self.extra = {}

    def path(self, *parts):
        return os.path.join(self.output_dir, *parts)

    def _require(self, key):
        value = OmegaConf.select(self.cfg, key)
        if not value:
            raise ConfigError("{} must be set for this command".format(key))
        return str(value)

    def _network(self):
        return load_network(self.path('network'))

    def _zones(self, network):
        return load_zones(self.path('zones'), network)

    def _panel(self):
        path = self.path('ingest', 'observations.csv')
        if not os.path.exists(path):
            raise MissingArtifactError("Missing observation panel {}, run ingest first".format(path))
        return load_panel(path)

    def build_network(self):
        cfg = self.cfg.network
        network = parse_network(self._require('network.osm_path'), BoundingBox.from_config(cfg.bbox), cfg.mode, self.cfg)
        return write_network(network, self.path('network'))

    def build_zones(self):
        network = self._network()
        zones = build_zones(network, self.cfg.network.zoning.rows, self.cfg.network.zoning.cols)
        return write_zones(zones, self.path('zones'))

    def ingest(self):
        cfg = self.cfg.ingest
        if not cfg.observations_path and not cfg.provider_records_path:
            raise ConfigError("ingest needs ingest.observations_path or ingest.provider_records_path")

        outputs = []
        target = self.path('ingest', 'observations.csv')
        if cfg.provider_records_path:
            network = self._network()
            if cfg.mapping_path:
                mapping = SegmentMapping.load(cfg.mapping_path, network, self.cfg)
            else:
                mapping = SegmentMapping(network, cfg = self.cfg)

            observations = adapt_provider_file(cfg.provider_records_path, mapping, self.cfg)
            outputs.append(mapping.write_unmatched(self.path('ingest', 'unmatched_segments.csv')))

            adapted = self.path('ingest', 'provider_observations.csv')
            outputs.append(write_observations(observations, adapted))
            text_columns = {'link_id': str, 'date': str, 'slot': str}
            frames = [read_table(adapted, [], dtype = text_columns)]
            if cfg.observations_path:
                frames.append(read_table(cfg.observations_path, [], dtype = text_columns))

            # Combined table goes through the same loader as a plain observation file
            combined = pd.concat(frames, ignore_index = True)
            write_table(combined, target)
            panel = load_panel(target)
        else:
            panel = load_panel(cfg.observations_path)

        outputs.append(panel.write(target))
        self.extra['observations'] = len(panel)

        return outputs

    def reliability(self):
        network = self._network()
        panel = self._panel()
        cfg = self.cfg.ingest.reliability

        report = reliability_report(panel, network, float(cfg.min_length[network.mode]), cfg.slot, float(cfg.resolution))
        self.extra['reliability_links'] = len(report.link_ids)

        return write_reliability_report(report, self.path('reliability'))

    def metrics(self):
        network = self._network()
        panel = self._panel()
        cfg = self.cfg.metrics
        min_length = float(self.cfg.ingest.reliability.min_length[network.mode])
        timeline = load_timeline(cfg.timeline_path) if cfg.timeline_path else None

        series_list = []
        for slot in cfg.slots:
            for kind in ('cov', 'ci'):
                series = moving_series(panel, network, kind, slot, cfg.window_width, min_length)
                if timeline is not None:
                    series = annotate(series, timeline, self.cfg.run.city)
                series_list.append(series)

        changes = []
        for series in series_list:
            try:
                changes.append(relative_change(series))
            except UndefinedDeltaError as exc:
                logger.warning("Skipping relative change: %s", exc)

        values = study_period_cov(panel, network, cfg.hue_slot, min_length)
        document = hue_map(network, values, cfg.colormap)

        return [
            write_series(series_list, self.path('metrics', 'series.csv')),
            write_series(changes, self.path('metrics', 'series_relative.csv')),
            write_geojson(document, self.path('metrics', 'hue_map_cov_{}.geojson'.format(cfg.hue_slot))),
        ]

    def assign(self):
        network = self._network()
        zones = self._zones(network)
        od = load_od(self._require('assign.od_path'), zones)

        result = UserEquilibriumSolver(self.cfg, self.workers).solve(network, od)
        self.extra['assignment'] = {
            'relative_gap': float(result.relative_gap),
            'iterations': int(result.iterations),
            'converged': bool(result.converged),
            'vdf': OmegaConf.to_container(self.cfg.assign.vdf),
        }

        outputs = [result.write(self.path('assign', 'link_flows.csv'))]
        if od.total > 0:
            stats = network_stats(result, od, network)
            outputs.append(write_table(pd.DataFrame([stats.as_dict()]), self.path('assign', 'stats.csv')))

        return outputs

    def estimate(self):
        network = self._network()
        zones = self._zones(network)
        panel = self._panel()
        cfg = self.cfg.estimate

        dates = [str(date) for date in cfg.dates] or [date.isoformat() for date in panel.calendar]
        config = GaConfig.from_config(cfg.ga, self.cfg.run.seed)
        params = VdfParams.from_config(self.cfg.assign.vdf)
        solver = UserEquilibriumSolver(self.cfg, self.workers)

        outputs = []
        rows = []
        for date in dates:
            observed = observed_times(panel, date, cfg.slot)
            od, best, trace = estimate_od(network, zones, observed, config, params, cfg.ue_tolerance, cfg.ue_max_iter,
                self.cfg.assign.connector_time, cfg.gravity, self.workers)

            outputs.append(write_od(od, self.path('estimate', date, 'od.csv')))
            outputs.append(write_trace(trace, self.path('estimate', date, 'trace.csv')))
            self.extra[date] = {'rmse': float(best.rmse), 'generations': int(trace[-1].generation)}

            if od.total > 0:
                result = solver.solve(network, od, destination_flows = True)
                stats = network_stats(result, od, network)
                rows.append([date, stats.avg_trip_length, stats.avg_travel_time, stats.total_demand])
                report = zonal_report(result, od, zones, network)
                outputs.append(write_zonal_report(report, zones, self.path('estimate', date, 'zonal.geojson')))
                outputs.append(write_zonal_table(report, od, self.path('estimate', date, 'zonal.csv')))
            else:
                logger.warning("Estimated matrix for %s carries no demand, no statistics written", date)

        outputs.append(write_table(pd.DataFrame(rows, columns = STATS_COLUMNS), self.path('estimate', 'stats.csv')))
        return outputs

    def report(self):
        path = self.path('estimate', 'stats.csv')
        if not os.path.exists(path):
            raise MissingArtifactError("Missing estimation statistics {}, run estimate first".format(path))

        frame = read_table(path, STATS_COLUMNS, dtype = {'date': str})
        stats = {row[0]: NetworkStats(float(row[1]), float(row[2]), float(row[3])) for row in frame.itertuples(index = False, name = None)}
        if len(stats) == 0:
            raise UndefinedDeltaError("No estimation statistics to compare")

        base_date = str(self.cfg.estimate.base_date) if self.cfg.estimate.base_date else frame['date'].iloc[0]
        if base_date not in stats:
            raise UndefinedDeltaError("Base date {} has no estimation statistics".format(base_date))

        others = [(date, value) for date, value in stats.items() if date != base_date]
        report = compare_days(stats[base_date], others, city = self.cfg.run.city, base_date = base_date)

        outputs = write_comparison(report, self.path('report', 'comparison.csv'), self.path('report', 'comparison.txt'))
        changes = self._zonal_changes(base_date, [date for date, _ in others])
        if changes is not None:
            outputs.append(write_zonal_changes(changes, self.path('report', 'zonal_changes.csv')))

        return outputs

    def _zonal_day(self, date, zones):
        # Zonal totals of one estimated day, None when its matrix was not written
        od_path = self.path('estimate', date, 'od.csv')
        if not os.path.exists(od_path):
            return None

        dest_ci = {}
        zonal_path = self.path('estimate', date, 'zonal.csv')
        if os.path.exists(zonal_path):
            frame = read_table(zonal_path, ['zone_id', 'dest_ci'])
            dest_ci = {int(row.zone_id): float(row.dest_ci) for row in frame.itertuples(index = False)}

        return zonal_totals(load_od(od_path, zones), dest_ci)

    def _zonal_changes(self, base_date, dates):
        if not os.path.exists(self.path('estimate', base_date, 'od.csv')):
            logger.warning("No estimated matrix for base date %s, zonal changes skipped", base_date)
            return None

        zones = self._zones(self._network())
        base = self._zonal_day(base_date, zones)
        others = []
        for date in dates:
            frame = self._zonal_day(date, zones)
            if frame is None:
                logger.warning("No estimated matrix for %s, left out of the zonal changes", date)
                continue
            others.append((date, frame))

        return zonal_changes(base, others)


COMMANDS = {
    'build-network': PipelineRunner.build_network,
    'build-zones': PipelineRunner.build_zones,
    'ingest': PipelineRunner.ingest,
    'reliability': PipelineRunner.reliability,
    'metrics': PipelineRunner.metrics,
    'assign': PipelineRunner.assign,
    'estimate': PipelineRunner.estimate,
    'report': PipelineRunner.report,
}


def library_versions():
    versions = {'travel_od': __version__, 'python': platform.python_version()}
    for name in LIBRARIES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = None

    return versions


def write_manifest(command, cfg, output_dir, outputs, wall_time, extra):
    manifest = {
        'command': command,
        'config': OmegaConf.to_container(cfg, resolve = True),
        'versions': library_versions(),
        'seed': int(cfg.run.seed),
        'wall_time_s': round(float(wall_time), 3),
        'outputs': [
            {'path': os.path.relpath(path, output_dir), 'sha256': file_sha256(path)}
            for path in sorted(set(outputs))
        ],
        'details': extra,
    }

    path = os.path.join(output_dir, 'manifest_{}.yaml'.format(command.replace('-', '_')))
    with open(path, 'w') as file:
        yaml.safe_dump(manifest, file, sort_keys = False, default_flow_style = False)

    return path


def build_parser():
    parser = argparse.ArgumentParser(prog = 'travel-od', description = 'Travel time disruption analysis and OD estimation pipeline')
    parser.add_argument('command', choices = list(COMMANDS))
    parser.add_argument('--config', default = None, help = 'YAML run config merged over the packaged defaults')
    parser.add_argument('--out', default = None, help = 'Output directory')
    parser.add_argument('--seed', type = int, default = None)
    parser.add_argument('--workers', type = int, default = None)
    parser.add_argument('--verbose', action = 'store_true', default = False)

    return parser


def resolve_config(args):
    cfg = load_run_config(args.config)

    if args.seed is not None:
        OmegaConf.update(cfg, 'run.seed', int(args.seed))
    if args.workers is not None:
        OmegaConf.update(cfg, 'run.workers', int(args.workers))

    # --out beats the environment, which beats the config file
    output_dir = args.out or os.environ.get(OUTPUT_ENV) or cfg.run.output_dir
    OmegaConf.update(cfg, 'run.output_dir', str(output_dir))

    validate_run_config(cfg)
    GaConfig.from_config(cfg.estimate.ga, cfg.run.seed)

    return cfg


def run(command, cfg):
    output_dir = cfg.run.output_dir
    os.makedirs(output_dir, exist_ok = True)

    runner = PipelineRunner(cfg, output_dir, cfg.run.workers)
    start = time.perf_counter()
    outputs = COMMANDS[command](runner)
    wall_time = time.perf_counter() - start

    manifest = write_manifest(command, cfg, output_dir, outputs, wall_time, runner.extra)
    logger.info("%s finished in %.1f s, manifest %s", command, wall_time, manifest)

    return outputs


def _fail(command, exc):
    print(json.dumps({'command': command, 'error': type(exc).__name__, 'message': str(exc)}), file = sys.stderr)


def main(argv = None):
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose)

    try:
        run(args.command, resolve_config(args))
    except TravelOdError as exc:
        _fail(args.command, exc)
        return 2
    except Exception as exc:
        logger.debug("Unexpected failure", exc_info = True)
        _fail(args.command, exc)
        return 1

    return 0


if __name__ == '__main__':
    sys.exit(main())
