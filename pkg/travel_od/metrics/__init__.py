from travel_od.metrics.congestion import LinkCongestion, NetworkCongestion, link_ci, network_ci
from travel_od.metrics.hue_map import hue_map, write_geojson
from travel_od.metrics.series import MetricSeries, moving_series, relative_change, write_series
from travel_od.metrics.timeline import EventTimeline, TimelineEvent, annotate, load_timeline
from travel_od.metrics.variability import LinkCov, NetworkCov, WindowSpec, link_cov, network_cov, study_period_cov
