import logging

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'

# Data-quality flags go to their own logger so they can be routed separately
quality_logger = logging.getLogger('travel_od.quality')


def setup_logging(verbose = False):
    logging.basicConfig(level = logging.DEBUG if verbose else logging.INFO, format = LOG_FORMAT, force = True)
