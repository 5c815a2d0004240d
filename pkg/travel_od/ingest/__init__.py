from travel_od.ingest.panel import DepartureSlot, ObservationPanel, TravelTimeObservation, WHOLE_DAY, load_panel
from travel_od.ingest.provider_adapter import adapt_provider_file, adapt_provider_response, write_observations
from travel_od.ingest.reliability import ReliabilityReport, reliability_report, unique_update_count, write_reliability_report
