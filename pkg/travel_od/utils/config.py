# Standard imports
import os

import yaml

# Parameter management imports
from hydra import compose, initialize_config_dir
from omegaconf import DictConfig, OmegaConf
from omegaconf.errors import OmegaConfBaseException

from travel_od.utils.errors import ConfigError

PARAMETERS_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'parameters')

# Config keys holding input file paths, resolved against the run config's directory
PATH_KEYS = [
    'network.osm_path',
    'ingest.observations_path',
    'ingest.mapping_path',
    'ingest.provider_records_path',
    'metrics.timeline_path',
    'assign.od_path',
]


def load_config(config_name = 'pipeline', overrides = None):
    # Composing the packaged parameter tree the same way for every component
    with initialize_config_dir(config_dir = PARAMETERS_DIR, version_base = None):
        cfg = compose(config_name = config_name, overrides = list(overrides or []))

    return cfg


def section(cfg, name):
    # Components accept either the full pipeline config or their own section
    if cfg is None:
        return load_config()[name]

    if name in cfg and isinstance(cfg[name], DictConfig):
        return cfg[name]

    return cfg


def load_run_config(config_path = None):
    cfg = load_config()

    if config_path is None:
        return cfg

    if not os.path.isfile(config_path):
        raise ConfigError("Run config {} does not exist".format(config_path))

    try:
        user_cfg = OmegaConf.load(config_path)
        merged = OmegaConf.merge(cfg, user_cfg)
    except (OmegaConfBaseException, yaml.YAMLError) as exc:
        raise ConfigError("Run config {} is invalid: {}".format(config_path, exc)) from exc

    # Relative input paths are read relative to the config file
    base_dir = os.path.dirname(os.path.abspath(config_path))
    for key in PATH_KEYS:
        value = OmegaConf.select(merged, key)
        if value and not os.path.isabs(str(value)):
            OmegaConf.update(merged, key, os.path.normpath(os.path.join(base_dir, str(value))))

    return merged


def validate_run_config(cfg):
    for key in PATH_KEYS:
        value = OmegaConf.select(cfg, key)
        if value and not os.path.exists(str(value)):
            raise ConfigError("{} points to a missing file: {}".format(key, value))

    positive_keys = [
        'network.zoning.rows',
        'network.zoning.cols',
        'ingest.reliability.min_length.city',
        'ingest.reliability.min_length.highway',
        'metrics.window_width',
        'assign.tolerance',
        'assign.max_iter',
        'assign.connector_time',
        'estimate.ue_tolerance',
        'estimate.ue_max_iter',
    ]
    for key in positive_keys:
        value = OmegaConf.select(cfg, key)
        if value is None or value <= 0:
            raise ConfigError("{} must be positive, got {}".format(key, value))

    if cfg.network.mode not in ('city', 'highway'):
        raise ConfigError("network.mode must be city or highway, got {}".format(cfg.network.mode))

    if cfg.assign.vdf.alpha < 0 or cfg.assign.vdf.beta < 1:
        raise ConfigError("assign.vdf needs alpha >= 0 and beta >= 1")

    if cfg.run.workers < 1:
        raise ConfigError("run.workers must be at least 1")

    return cfg
