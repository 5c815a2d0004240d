from travel_od.assign_core.equilibrium import AssignmentResult, UserEquilibriumSolver, user_equilibrium
from travel_od.assign_core.od_matrix import ODMatrix, load_od, write_od
from travel_od.assign_core.shortest_path import AssignmentGraph, ShortestPathTree, all_or_nothing, shortest_path_tree
from travel_od.assign_core.stats import NetworkStats, network_stats
from travel_od.assign_core.vdf import VdfParams, link_times, vdf_time
