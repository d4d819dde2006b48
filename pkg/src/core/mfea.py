"""Multifactorial evolutionary algorithm over a unified [0, 1] search space.

One population serves K minimization tasks at once. Each candidate keeps
a factorial cost per task (``UNEVALUATED`` where it was never evaluated),
from which factorial ranks, scalar fitness and skill factor follow.
Offspring are evaluated only on the task inherited from a parent.
"""

from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, List, Optional, Protocol, Sequence, Tuple, runtime_checkable

import numpy as np

from ..utils.error_handler import ConfigurationError, UsageError
from ..utils.logging_setup import get_logger
from .operators import polynomial_mutation, sbx_crossover
from .seeding import make_rng

logger = get_logger(__name__)

UNEVALUATED = np.inf


@runtime_checkable
class MultitaskEvaluator(Protocol):
    """Anything that can score unified genomes on single tasks."""

    n_tasks: int
    dimension: int

    def evaluate(
        self, genomes: np.ndarray, task_indices: np.ndarray, generation: int
    ) -> np.ndarray:
        """Factorial cost of genome i on task_indices[i] (lower is better)."""
        ...


@dataclass
class MfeaConfig:
    """Population and operator settings; ``mutation_prob=None`` means 1/D."""

    population_size: int = 100
    generations: int = 60
    rmp: float = 0.3
    sbx_eta: float = 15.0
    mutation_eta: float = 20.0
    mutation_prob: Optional[float] = None
    constraint_penalty: float = 0.0
    seed: int = 0

    def validate(self, n_tasks: Optional[int] = None) -> None:
        if self.population_size < 4 or self.population_size % 2:
            raise ConfigurationError(
                f"must be even and >= 4, got {self.population_size}",
                field_path="mfea.population_size",
            )
        if n_tasks is not None and self.population_size < n_tasks:
            raise ConfigurationError(
                f"must be >= the number of tasks ({n_tasks}), got {self.population_size}",
                field_path="mfea.population_size",
            )
        if self.generations < 0:
            raise ConfigurationError(
                f"must be >= 0, got {self.generations}", field_path="mfea.generations"
            )
        if not 0.0 <= self.rmp <= 1.0:
            raise ConfigurationError(f"must lie in [0, 1], got {self.rmp}", field_path="mfea.rmp")
        for name in ("sbx_eta", "mutation_eta"):
            if getattr(self, name) <= 0:
                raise ConfigurationError(
                    f"must be positive, got {getattr(self, name)}", field_path=f"mfea.{name}"
                )
        if self.mutation_prob is not None and not 0.0 <= self.mutation_prob <= 1.0:
            raise ConfigurationError(
                f"must lie in [0, 1], got {self.mutation_prob}", field_path="mfea.mutation_prob"
            )
        if self.constraint_penalty < 0:
            raise ConfigurationError(
                f"must be >= 0, got {self.constraint_penalty}",
                field_path="mfea.constraint_penalty",
            )

    @classmethod
    def from_budget(cls, max_evaluations: int, population_size: int = 100, **kwargs) -> "MfeaConfig":
        """Generations that fit a fitness-evaluation budget: max_evaluations // P."""
        if max_evaluations < 0:
            raise ConfigurationError(
                f"must be >= 0, got {max_evaluations}", field_path="mfea.max_evaluations"
            )
        return cls(
            population_size=population_size,
            generations=max_evaluations // population_size,
            **kwargs,
        )

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "MfeaConfig":
        return cls(**data)


@dataclass
class FactorialRecord:
    """Factorial bookkeeping of one candidate."""

    factorial_costs: np.ndarray
    factorial_ranks: np.ndarray
    scalar_fitness: float
    skill_factor: int


@dataclass
class Candidate:
    genome: np.ndarray
    record: FactorialRecord
    birth_generation: int = 0


@dataclass
class Offspring:
    """A child genome before evaluation."""

    genome: np.ndarray
    assigned_task: int
    parent_skills: Tuple[int, int]
    crossover: bool


@dataclass
class CrossoverEvent:
    """Provenance of one crossover offspring."""

    generation: int
    mating_index: int
    offspring_index: int
    parent_skill_a: int
    parent_skill_b: int
    assigned_task: int
    donor_task: int
    improved: Optional[bool] = None
    offspring_cost: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CrossoverEvent":
        return cls(**data)


@dataclass
class GenerationStats:
    """Population statistics after a generation, in reward sign (reward = -cost)."""

    generation: int
    evaluations: int
    best_reward: List[float]
    mean_reward: List[float]
    std_reward: List[float]

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "GenerationStats":
        return cls(**data)


@dataclass
class MfeaResult:
    best_genomes: np.ndarray
    best_costs: np.ndarray
    history: List[GenerationStats]
    events: List[CrossoverEvent]
    evaluations: int
    generations: int
    crossover_matings: int
    population: np.ndarray = field(repr=False)
    costs: np.ndarray = field(repr=False)


def compute_factorial_ranks(costs: np.ndarray) -> np.ndarray:
    """1-based rank per task by ascending cost; ties by index; unevaluated rank last (= row count)."""
    costs = np.asarray(costs, dtype=np.float64)
    if costs.ndim != 2 or costs.shape[0] == 0:
        raise UsageError(f"need a non-empty P x K cost table, got shape {costs.shape}")
    n, k = costs.shape
    ranks = np.empty((n, k), dtype=np.int64)
    for task in range(k):
        column = costs[:, task]
        order = np.argsort(column, kind="stable")
        ranks[order, task] = np.arange(1, n + 1)
        ranks[~np.isfinite(column), task] = n
    return ranks


def update_scalar_fitness_and_skill(ranks: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Scalar fitness 1/min_k r_k and skill factor argmin_k r_k (lowest task on ties)."""
    ranks = np.asarray(ranks)
    return 1.0 / ranks.min(axis=1), ranks.argmin(axis=1)


def assign_evaluation_task(parent_skills: Sequence[int], rng: np.random.Generator) -> int:
    """Vertical cultural transmission: imitate one parent chosen uniformly at random."""
    if len(parent_skills) == 1:
        return int(parent_skills[0])
    return int(parent_skills[int(rng.integers(len(parent_skills)))])


def assortative_mating(
    p1: Candidate,
    p2: Candidate,
    cfg: MfeaConfig,
    rng: np.random.Generator,
    mutation_prob: Optional[float] = None,
) -> List[Offspring]:
    """Two offspring; crossover when skills agree or with probability rmp."""
    skill_a = p1.record.skill_factor
    skill_b = p2.record.skill_factor
    if mutation_prob is None:
        mutation_prob = cfg.mutation_prob if cfg.mutation_prob is not None else 1.0 / p1.genome.size

    # the rmp draw is always taken so the stream layout does not depend on the skills
    draw = rng.random()
    if skill_a == skill_b or draw < cfg.rmp:
        c1, c2 = sbx_crossover(p1.genome, p2.genome, cfg.sbx_eta, rng)
        children = []
        for child in (c1, c2):
            mutated = polynomial_mutation(child, cfg.mutation_eta, mutation_prob, rng)
            task = assign_evaluation_task((skill_a, skill_b), rng)
            children.append(Offspring(mutated, task, (skill_a, skill_b), True))
        return children

    return [
        Offspring(
            polynomial_mutation(parent.genome, cfg.mutation_eta, mutation_prob, rng),
            assign_evaluation_task((parent.record.skill_factor,), rng),
            (parent.record.skill_factor, parent.record.skill_factor),
            False,
        )
        for parent in (p1, p2)
    ]


def select_survivors(scalar_fitness: np.ndarray, birth_generation: np.ndarray, size: int) -> np.ndarray:
    """Indices of the ``size`` fittest (older first, then lower index on ties), in pool order."""
    scalar_fitness = np.asarray(scalar_fitness)
    if scalar_fitness.shape[0] < size:
        raise UsageError(f"cannot select {size} survivors from {scalar_fitness.shape[0]}")
    index = np.arange(scalar_fitness.shape[0])
    order = np.lexsort((index, np.asarray(birth_generation), -scalar_fitness))
    return np.sort(order[:size])


def _donor(event_skills: Tuple[int, int], assigned: int) -> int:
    a, b = event_skills
    return b if assigned == a else a


class MfeaEngine:
    """Stateful MFEA loop; one call to ``step_generation`` per generation."""

    def __init__(self, evaluator: MultitaskEvaluator, config: MfeaConfig):
        config.validate(n_tasks=evaluator.n_tasks)
        self.evaluator = evaluator
        self.config = config
        self.n_tasks = evaluator.n_tasks
        self.dimension = evaluator.dimension
        self.mutation_prob = (
            config.mutation_prob if config.mutation_prob is not None else 1.0 / self.dimension
        )
        self.rng = make_rng(config.seed)

        self.generation = 0
        self.evaluations = 0
        self.crossover_matings = 0
        self.initialized = False
        self.population = np.empty((0, self.dimension))
        self.costs = np.empty((0, self.n_tasks))
        self.birth = np.empty(0, dtype=np.int64)
        self.best_costs = np.full(self.n_tasks, UNEVALUATED)
        self.best_genomes = np.full((self.n_tasks, self.dimension), np.nan)
        self.history: List[GenerationStats] = []
        self.events: List[CrossoverEvent] = []

    # factorial bookkeeping

    @property
    def ranks(self) -> np.ndarray:
        return compute_factorial_ranks(self.costs)

    @property
    def scalar_fitness(self) -> np.ndarray:
        return update_scalar_fitness_and_skill(self.ranks)[0]

    @property
    def skill_factor(self) -> np.ndarray:
        return update_scalar_fitness_and_skill(self.ranks)[1]

    def candidates(self) -> List[Candidate]:
        ranks = self.ranks
        phi, tau = update_scalar_fitness_and_skill(ranks)
        return [
            Candidate(
                genome=self.population[i],
                record=FactorialRecord(self.costs[i], ranks[i], float(phi[i]), int(tau[i])),
                birth_generation=int(self.birth[i]),
            )
            for i in range(len(self.population))
        ]

    def _update_best(self) -> None:
        for task in range(self.n_tasks):
            column = self.costs[:, task]
            i = int(np.argmin(column))
            if column[i] < self.best_costs[task]:
                self.best_costs[task] = column[i]
                self.best_genomes[task] = self.population[i]

    def _record_stats(self) -> GenerationStats:
        best, mean, std = [], [], []
        for task in range(self.n_tasks):
            rewards = -self.costs[np.isfinite(self.costs[:, task]), task]
            best.append(float(rewards.max()))
            mean.append(float(rewards.mean()))
            std.append(float(rewards.std()))
        stats = GenerationStats(self.generation, self.evaluations, best, mean, std)
        self.history.append(stats)
        return stats

    # loop

    def initialize(self) -> GenerationStats:
        """Random population evaluated on every task."""
        p = self.config.population_size
        self.population = self.rng.random((p, self.dimension))
        genomes = np.tile(self.population, (self.n_tasks, 1))
        tasks = np.repeat(np.arange(self.n_tasks), p)
        # tasks are unconstrained, so factorial cost is the raw objective
        costs = np.asarray(self.evaluator.evaluate(genomes, tasks, 0), dtype=np.float64)
        self.costs = costs.reshape(self.n_tasks, p).T.copy()
        self.birth = np.zeros(p, dtype=np.int64)
        self.evaluations = p * self.n_tasks
        self.generation = 0
        self.initialized = True
        self._update_best()
        stats = self._record_stats()
        logger.info(
            "population_initialized",
            population=p,
            tasks=self.n_tasks,
            dimension=self.dimension,
            evaluations=self.evaluations,
        )
        return stats

    def step_generation(self) -> GenerationStats:
        """Mate, evaluate offspring on their assigned task, merge and select."""
        if not self.initialized:
            raise UsageError("initialize() must run before step_generation()")
        generation = self.generation + 1
        p = self.config.population_size
        parents = self.candidates()

        offspring: List[Offspring] = []
        mating_of: List[int] = []
        crossover_matings = 0
        order = self.rng.permutation(p)
        for mating in range(p // 2):
            pair = assortative_mating(
                parents[order[2 * mating]],
                parents[order[2 * mating + 1]],
                self.config,
                self.rng,
                self.mutation_prob,
            )
            crossover_matings += int(pair[0].crossover)
            offspring.extend(pair)
            mating_of.extend([mating, mating])

        genomes = np.stack([child.genome for child in offspring])
        tasks = np.array([child.assigned_task for child in offspring], dtype=np.int64)
        child_costs = np.asarray(self.evaluator.evaluate(genomes, tasks, generation), dtype=np.float64)
        self.evaluations += len(offspring)

        for index, child in enumerate(offspring):
            if not child.crossover:
                continue
            cost = float(child_costs[index])
            self.events.append(
                CrossoverEvent(
                    generation=generation,
                    mating_index=mating_of[index],
                    offspring_index=index,
                    parent_skill_a=child.parent_skills[0],
                    parent_skill_b=child.parent_skills[1],
                    assigned_task=child.assigned_task,
                    donor_task=_donor(child.parent_skills, child.assigned_task),
                    improved=bool(cost < self.costs[:, child.assigned_task].min()),
                    offspring_cost=cost,
                )
            )
        self.crossover_matings += crossover_matings

        offspring_table = np.full((len(offspring), self.n_tasks), UNEVALUATED)
        offspring_table[np.arange(len(offspring)), tasks] = child_costs

        pool = np.vstack([self.population, genomes])
        pool_costs = np.vstack([self.costs, offspring_table])
        pool_birth = np.concatenate([self.birth, np.full(len(offspring), generation)])
        phi, _ = update_scalar_fitness_and_skill(compute_factorial_ranks(pool_costs))
        survivors = select_survivors(phi, pool_birth, p)

        self.population = pool[survivors]
        self.costs = pool_costs[survivors]
        self.birth = pool_birth[survivors]
        self.generation = generation
        self._update_best()
        stats = self._record_stats()
        logger.debug(
            "generation_complete",
            generation=generation,
            evaluations=self.evaluations,
            crossover_matings=crossover_matings,
            best_reward=stats.best_reward,
        )
        return stats

    def run(self, callback: Optional[Callable[["MfeaEngine"], None]] = None) -> "MfeaResult":
        """Initialize if needed, then advance to ``config.generations``."""
        if not self.initialized:
            self.initialize()
            if callback is not None:
                callback(self)
        while self.generation < self.config.generations:
            self.step_generation()
            if callback is not None:
                callback(self)
        return self.result()

    def result(self) -> MfeaResult:
        return MfeaResult(
            best_genomes=self.best_genomes.copy(),
            best_costs=self.best_costs.copy(),
            history=list(self.history),
            events=list(self.events),
            evaluations=self.evaluations,
            generations=self.generation,
            crossover_matings=self.crossover_matings,
            population=self.population.copy(),
            costs=self.costs.copy(),
        )

    # checkpoint support

    def state_dict(self) -> Dict[str, Any]:
        """Everything needed to continue the run bit-for-bit (arrays left as ndarrays)."""
        return {
            "generation": self.generation,
            "evaluations": self.evaluations,
            "crossover_matings": self.crossover_matings,
            "config": self.config.to_dict(),
            "rng_state": self.rng.bit_generator.state,
            "population": self.population.copy(),
            "costs": self.costs.copy(),
            "birth": self.birth.tolist(),
            "best_costs": self.best_costs.copy(),
            "best_genomes": self.best_genomes.copy(),
            "history": [s.to_dict() for s in self.history],
            "events": [e.to_dict() for e in self.events],
        }

    @classmethod
    def from_state(cls, evaluator: MultitaskEvaluator, state: Dict[str, Any]) -> "MfeaEngine":
        engine = cls(evaluator, MfeaConfig.from_dict(state["config"]))
        population = np.asarray(state["population"], dtype=np.float64)
        if population.shape[1:] != (engine.dimension,):
            raise UsageError(
                f"checkpoint genomes have shape {population.shape}, evaluator expects {engine.dimension} dims"
            )
        engine.rng.bit_generator.state = state["rng_state"]
        engine.generation = int(state["generation"])
        engine.evaluations = int(state["evaluations"])
        engine.crossover_matings = int(state["crossover_matings"])
        engine.population = population
        engine.costs = np.asarray(state["costs"], dtype=np.float64)
        engine.birth = np.asarray(state["birth"], dtype=np.int64)
        engine.best_costs = np.asarray(state["best_costs"], dtype=np.float64)
        engine.best_genomes = np.asarray(state["best_genomes"], dtype=np.float64)
        engine.history = [GenerationStats.from_dict(s) for s in state["history"]]
        engine.events = [CrossoverEvent.from_dict(e) for e in state["events"]]
        engine.initialized = True
        return engine


def run_mfea(
    evaluator: MultitaskEvaluator,
    cfg: MfeaConfig,
    callback: Optional[Callable[[MfeaEngine], None]] = None,
) -> MfeaResult:
    """Full MFEA run; the task list is carried by ``evaluator``."""
    return MfeaEngine(evaluator, cfg).run(callback)
