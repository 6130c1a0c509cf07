"""Functions for working with Ray (parallelization library)."""

from __future__ import annotations

import os
from collections.abc import Callable, Sequence
from typing import Any

import ray
from tqdm import tqdm

from qpk.utils.funcs import get_logger

logger = get_logger(__name__)


def initialize_ray(num_cpus: int | None = None, quiet: bool = False):
    """Simple function to initialize ray. Basic support for running ray on multiple nodes.
    Currently supports SLURM and PBS job schedulers.

    SLURM:
        Checks enviornment for existence of "ip_head" for situations where the user is
        running on multiple nodes. Automatically creats a new ray cluster if it has not
        been initialized. See https://github.com/NERSC/slurm-ray-cluster/
    PBS:
        Checks environment for PBS_NNODES > 1.

    Args:
        num_cpus: Number of CPUs for a newly created local instance. Ignored when
            connecting to an existing cluster. Defaults to all available CPUs.
        quiet: Whether to suppress INFO logging.
    """
    if not quiet:
        logger.setLevel("INFO")
    else:
        logger.setLevel("WARNING")
    if not ray.is_initialized():
        logger.info("Ray is not initialized. Checking for existing cluster...")
        if os.environ.get("IP_HEAD") or int(os.environ.get("PBS_NNODES", 0)) > 1:
            ray.init(
                address="auto",
            )
        else:
            logger.info("Could not identify existing Ray instance. Creating a new one...")
            ray.init(num_cpus=num_cpus, include_dashboard=False)

        logger.info(
            f"HOST: {ray.nodes()[0]['NodeManagerHostname']}, "
            f"Num CPUs: {ray.cluster_resources()['CPU']}, "
            f"Total Memory: {ray.cluster_resources()['memory']}"
        )
    else:
        logger.info("Ray is already initialized.")


def to_iterator(obj_ids, get_obj_ids: bool = False):
    """Method to convert a list of ray object ids to an iterator that can be used in a for
    loop.
    """
    while obj_ids:
        done, obj_ids = ray.wait(obj_ids)
        if get_obj_ids:
            yield done[0], ray.get(done[0])
        else:
            yield ray.get(done[0])


def _indexed(func: Callable, index: int, args: tuple) -> tuple[int, Any]:
    return index, func(*args)


def parallel_map(
    func: Callable,
    tasks: Sequence[tuple],
    jobs: int = 1,
    desc: str | None = None,
    quiet: bool = True,
) -> list[Any]:
    """Applies func to every argument tuple in tasks and returns results in task order.

    With jobs <= 1 the tasks run in-process, one after the other. Otherwise each task is
    submitted as a ray remote function on an instance with `jobs` CPUs and results are
    collected as they complete, then re-ordered.
    """
    if jobs <= 1 or len(tasks) <= 1:
        return [func(*args) for args in tqdm(tasks, disable=quiet, desc=desc)]

    if not ray.is_initialized():
        initialize_ray(num_cpus=jobs, quiet=quiet)

    remote = ray.remote(_indexed)
    func_ref = ray.put(func)
    refs = [remote.remote(func_ref, i, args) for i, args in enumerate(tasks)]

    results: list[Any] = [None] * len(tasks)
    for index, result in tqdm(to_iterator(refs), total=len(refs), disable=quiet, desc=desc):
        results[index] = result
    return results
