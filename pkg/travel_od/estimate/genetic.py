"""Genetic search for OD matrices that reproduce observed link times.

Chromosomes are the off-diagonal cells of the OD matrix. The population is
seeded around the gravity matrix total that best fits the observed times.
Each generation keeps its elite unchanged and breeds the rest through
tournament selection, blend crossover and multiplicative log-normal mutation.
Every child draws from its own random stream seeded by (seed, generation,
index), so serial and pooled evaluation give the same run.
"""

# Standard imports
import logging
import multiprocessing
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import pandas as pd

from travel_od.assign_core.shortest_path import DEFAULT_CONNECTOR_TIME
from travel_od.assign_core.vdf import VdfParams
from travel_od.estimate.fitness import FitnessEvaluator
from travel_od.estimate.gravity import anchor_total, seed_population
from travel_od.utils.config import section
from travel_od.utils.errors import EstimationError, InvalidGaConfigError
from travel_od.utils.tables import write_table

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ['generation', 'best_total', 'mean_total']

# Evaluator shared with pool workers through the initializer
_worker_evaluator = None


def _init_worker(evaluator):
    global _worker_evaluator
    _worker_evaluator = evaluator


def _worker_fitness(chromosome):
    return _worker_evaluator(chromosome)


@dataclass(frozen = True)
class GaConfig:
    population: int = 64
    generations: int = 300
    elite: int = 2
    tournament: int = 4
    crossover_rate: float = 0.9
    mutation_rate: float = 0.2
    mutation_scale: float = 0.3
    seed: int = 0
    stall_patience: int = 40
    min_improvement: float = 1e-6

    def __post_init__(self):
        if self.population < 4:
            raise InvalidGaConfigError("population must be at least 4, got {}".format(self.population))
        if not 1 <= self.elite < self.population:
            raise InvalidGaConfigError("elite must lie in [1, population), got {}".format(self.elite))
        if not 1 <= self.tournament <= self.population:
            raise InvalidGaConfigError("tournament must lie in [1, population], got {}".format(self.tournament))
        for name in ('crossover_rate', 'mutation_rate'):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise InvalidGaConfigError("{} must lie in [0, 1], got {}".format(name, getattr(self, name)))
        if not self.mutation_scale > 0:
            raise InvalidGaConfigError("mutation_scale must be positive, got {}".format(self.mutation_scale))
        if self.generations < 0 or self.stall_patience < 1:
            raise InvalidGaConfigError("generations must be nonnegative and stall_patience positive")

    @classmethod
    def from_config(cls, cfg, seed):
        return cls(
            population = int(cfg.population),
            generations = int(cfg.generations),
            elite = int(cfg.elite),
            tournament = int(cfg.tournament),
            crossover_rate = float(cfg.crossover_rate),
            mutation_rate = float(cfg.mutation_rate),
            mutation_scale = float(cfg.mutation_scale),
            seed = int(seed),
            stall_patience = int(cfg.stall_patience),
            min_improvement = float(cfg.min_improvement)
        )


class TraceRow(NamedTuple):
    generation: int
    best_total: float
    mean_total: float


def trace_frame(trace):
    return pd.DataFrame([tuple(row) for row in trace], columns = TRACE_COLUMNS)


def write_trace(trace, path):
    return write_table(trace_frame(trace), path, TRACE_COLUMNS)


def _tournament(rng, scores, size):
    entrants = rng.choice(len(scores), size = size, replace = False)
    return min(entrants, key = lambda idx: (scores[idx], idx))


def breed(population, scores, config, generation, index):
    """One child from its own (seed, generation, index) stream."""
    rng = np.random.default_rng([config.seed, generation, index])
    first = population[_tournament(rng, scores, config.tournament)]
    second = population[_tournament(rng, scores, config.tournament)]

    if rng.random() < config.crossover_rate:
        weights = rng.random(len(first))
        child = weights * first + (1.0 - weights) * second
    else:
        child = first.copy()

    mutate = rng.random(len(child)) < config.mutation_rate
    # Log-normal factors with unit mean leave the expected cell demand unchanged
    child[mutate] *= np.exp(rng.normal(-0.5 * config.mutation_scale ** 2, config.mutation_scale, int(mutate.sum())))

    return child


def _summary(scores):
    finite = [score for score in scores if np.isfinite(score)]
    return min(scores), (float(np.mean(finite)) if len(finite) > 0 else np.inf)


class GeneticOdEstimator(object):
    def __init__(self, network, zones, observed, config, params = None, ue_tolerance = 1e-3, ue_max_iter = 40,
                 connector_time = DEFAULT_CONNECTOR_TIME, gravity_cfg = None, workers = 1):
        self.network = network
        self.zones = zones
        self.config = config
        self.gravity_cfg = gravity_cfg if gravity_cfg is not None else section(None, 'estimate').gravity
        self.connector_time = float(connector_time)
        self.workers = int(workers)

        self.evaluator = FitnessEvaluator(network, zones, observed, params or VdfParams(), ue_tolerance, ue_max_iter, connector_time)
        self._pool = None

    def _evaluate(self, chromosomes):
        if self._pool is not None:
            return self._pool.map(_worker_fitness, chromosomes)

        return [self.evaluator(chromosome) for chromosome in chromosomes]

    def run(self):
        config = self.config
        if self.workers > 1:
            self._pool = multiprocessing.Pool(self.workers, initializer = _init_worker, initargs = (self.evaluator,))

        try:
            anchor = None
            if self.gravity_cfg.get('anchor_spread'):
                anchor = anchor_total(self.evaluator, self.network, self.zones, self.gravity_cfg, self.connector_time)

            population = seed_population(self.network, self.zones, config.population, config.seed, self.gravity_cfg,
                self.connector_time, anchor)
            fitness = self._evaluate(population)
            scores = [value.total for value in fitness]

            if not any(value.feasible for value in fitness):
                raise EstimationError("Every seeded matrix leaves some demand unreachable")

            best, mean = _summary(scores)
            trace = [TraceRow(0, best, mean)]
            stall = 0

            for generation in range(1, config.generations + 1):
                ranking = sorted(range(len(population)), key = lambda idx: (scores[idx], idx))
                elites = ranking[:config.elite]

                children = [breed(population, scores, config, generation, index) for index in range(config.elite, config.population)]
                child_fitness = self._evaluate(children)

                # Elites carry their cached fitness into the next generation
                population = [population[idx] for idx in elites] + children
                fitness = [fitness[idx] for idx in elites] + child_fitness
                scores = [value.total for value in fitness]

                previous = best
                best, mean = _summary(scores)
                trace.append(TraceRow(generation, best, mean))
                logger.debug("Generation %d best %.6f mean %.6f", generation, best, mean)

                stall = 0 if previous - best >= config.min_improvement else stall + 1
                if stall >= config.stall_patience:
                    logger.info("Stopping after %d generations without improvement", stall)
                    break
        finally:
            if self._pool is not None:
                self._pool.close()
                self._pool.join()
                self._pool = None

        winner = min(range(len(population)), key = lambda idx: (scores[idx], idx))
        od = self.evaluator.decode(population[winner])
        logger.info("Estimated OD with %.1f trips, normalized time rmse %.4f after %d generations",
            od.total, fitness[winner].rmse, trace[-1].generation)

        return od, fitness[winner], trace


def estimate_od(network, zones, observed, config, params = None, ue_tolerance = 1e-3, ue_max_iter = 40,
                connector_time = DEFAULT_CONNECTOR_TIME, gravity_cfg = None, workers = 1):
    """Returns (ODMatrix, FitnessValue, trace rows) of the best matrix found."""
    estimator = GeneticOdEstimator(network, zones, observed, config, params, ue_tolerance, ue_max_iter,
        connector_time, gravity_cfg, workers)
    return estimator.run()
