"""Seeded Monte Carlo plumbing. Every replication draws from its own Philox
stream keyed by seed ^ replication index, so a replication's data doesn't
depend on which worker produced it or in which order blocks finished
"""
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, TypeVar

import numpy as np

from sglr_toolkit.app.config import CONFIG
from sglr_toolkit.app.context import get_run_id, set_run_id
from sglr_toolkit.app.exceptions import UnsupportedFamilyError
from sglr_toolkit.app.utils import log


WORKERS = CONFIG["simulation"].getint("workers")
BLOCK_SIZE = CONFIG["simulation"].getint("block_size")

Sampler = Callable[[np.random.Generator, int], np.ndarray]
T = TypeVar("T")


def replication_rng(seed: int, rep: int) -> np.random.Generator:
    """Random generator of replication rep
    """

    return np.random.Generator(np.random.Philox(key=int(seed) ^ int(rep)))


def gaussian_sampler(mu, sigma: float = 1.0) -> Sampler:
    """N(mu_i, sigma^2) observations, mu may be a constant or a mean per step
    """

    def sample(rng: np.random.Generator, horizon: int) -> np.ndarray:
        means = np.broadcast_to(np.asarray(mu, dtype=float), (horizon,))
        return means + sigma * rng.standard_normal(horizon)

    return sample


def bernoulli_sampler(p: float) -> Sampler:
    """Bernoulli(p) observations as floats
    """

    def sample(rng: np.random.Generator, horizon: int) -> np.ndarray:
        return (rng.random(horizon) < p).astype(float)

    return sample


def poisson_sampler(rate: float) -> Sampler:
    """Poisson(rate) observations as floats
    """

    def sample(rng: np.random.Generator, horizon: int) -> np.ndarray:
        return rng.poisson(rate, horizon).astype(float)

    return sample


def sampler_for(family: str, mu, sigma: float = 1.0) -> Sampler:
    """Sampler for the named family at mean mu
    """

    if family in ("gaussian", "subgaussian"):
        return gaussian_sampler(mu, sigma)
    if family == "bernoulli":
        return bernoulli_sampler(mu)
    if family == "poisson":
        return poisson_sampler(mu)
    raise UnsupportedFamilyError(f"no sampler for family {family}")


def simulate_block(sampler: Sampler, seed: int, reps: Sequence[int], horizon: int) -> np.ndarray:
    """Paths of the given replications, shape (len(reps), horizon)
    """

    return np.stack([sampler(replication_rng(seed, rep), horizon) for rep in reps])


def run_replications(task: Callable[[np.ndarray], T], reps: int,
        workers: Optional[int] = None, block_size: Optional[int] = None) -> List[T]:
    """Splits replication indices 0..reps-1 into blocks and runs task on each
    block in a thread pool. Results come back in block order

    :param task: called with an array of replication indices
    :type task: Callable
    :param reps: number of replications
    :type reps: int
    :param workers: pool size, from config when not given
    :type workers: int
    :param block_size: replications per block, from config when not given
    :type block_size: int
    :return: list of task results ordered by block
    """

    workers = workers or WORKERS
    block_size = block_size or BLOCK_SIZE
    blocks = [np.arange(start, min(start + block_size, reps)) for start in range(0, reps, block_size)]
    run_id = get_run_id()

    def run_block(block: np.ndarray) -> T:
        set_run_id(run_id)
        return task(block)

    log.debug(f"running {reps} replications in {len(blocks)} blocks on {workers} workers")
    if workers == 1:
        return [run_block(block) for block in blocks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_block, blocks))


def stopping_times(rule_times: Callable[[np.ndarray], np.ndarray], sampler: Sampler, seed: int,
        reps: int, horizon: int, workers: Optional[int] = None,
        block_size: Optional[int] = None) -> np.ndarray:
    """Stopping times of one or more rules on reps simulated paths

    :param rule_times: maps a (block, horizon) array of paths to stopping times,
        shape (..., block), np.inf for no rejection within the horizon
    :type rule_times: Callable
    :return: np.ndarray with replications on the last axis
    """

    def task(block: np.ndarray) -> np.ndarray:
        return np.asarray(rule_times(simulate_block(sampler, seed, block, horizon)))

    return np.concatenate(run_replications(task, reps, workers, block_size), axis=-1)
