class TravelOdError(Exception):
    """Base class for every error raised by the pipeline."""


class DomainValueError(TravelOdError, ValueError):
    """A domain object was constructed with values that break its invariants."""


# Network building
class NetworkParseError(TravelOdError):
    pass


class EmptyNetworkError(TravelOdError):
    pass


class ZoningError(TravelOdError):
    pass


class MappingLoadError(TravelOdError):
    pass


# Observation ingest
class PanelSchemaError(TravelOdError):
    pass


class ConflictingDuplicateError(PanelSchemaError):
    pass


class MissingLinkError(TravelOdError):
    pass


class EmptyReportError(TravelOdError):
    pass


class AdapterError(TravelOdError):
    pass


# Metrics
class UndefinedWindowError(TravelOdError):
    pass


class MissingFreeFlowError(TravelOdError):
    pass


class UndefinedDayError(TravelOdError):
    pass


class UnknownCityError(TravelOdError):
    pass


class EmptyValuesError(TravelOdError):
    pass


# Assignment
class ReachabilityError(TravelOdError):
    def __init__(self, origin, destination):
        super().__init__("Zone {} cannot reach zone {}".format(origin, destination))
        self.origin = origin
        self.destination = destination


class NumericError(TravelOdError):
    pass


class UndefinedStatsError(TravelOdError):
    pass


# Estimation and reports
class InvalidGaConfigError(TravelOdError):
    pass


class EstimationError(TravelOdError):
    pass


class UndefinedDeltaError(TravelOdError):
    pass


class UndefinedSharesError(TravelOdError):
    pass


# Command line
class ConfigError(TravelOdError):
    pass


class MissingArtifactError(TravelOdError):
    pass
