from travel_od.estimate.fitness import FitnessEvaluator, FitnessValue, fitness, observed_times
from travel_od.estimate.genetic import GaConfig, GeneticOdEstimator, TraceRow, estimate_od, write_trace
from travel_od.estimate.gravity import gravity_seed
from travel_od.estimate.reports import (ComparisonReport, ZonalReport, compare_days, destination_congestion_index,
    write_comparison, write_zonal_changes, write_zonal_report, write_zonal_table, zonal_changes, zonal_report, zonal_totals,
    zone_production_shares)
