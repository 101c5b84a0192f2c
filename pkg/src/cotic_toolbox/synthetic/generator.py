from __future__ import annotations

from dataclasses import dataclass
from multiprocessing import Pool, cpu_count
from typing import List, Tuple

import numpy as np

from cotic_toolbox.events.csv_io import write_csv
from cotic_toolbox.events.sequence import Dataset, EventSequence
from cotic_toolbox.synthetic.hawkes import HawkesParams, simulate_hawkes


class SequenceGenerator:
    """
    Simple class capable of simulating a set of independent Hawkes sequences in parallel. The
    simulation of index `i` is seeded from `(seed, i)`, so that the generated dataset does not
    depend on the number of cores used.

    Parameters
    ----------
    params: HawkesParams
        the parameters of the simulated process
    horizon: float
        the observation window `[0, horizon]` of every sequence
    n_sequences: int
        the number of sequences to simulate
    seed: int
        the base seed of the simulations (default: 0)
    verbose: bool
        if set to True information about the simulation process will be printed on terminal

    Raises
    ------
    UnstableParameters
        exception raised if the process is not stable
    ValueError
        exception raised if the horizon is negative or the number of sequences not positive
    """

    def __init__(
        self,
        params: HawkesParams,
        horizon: float,
        n_sequences: int,
        seed: int = 0,
        verbose: bool = False,
    ) -> None:

        params.check_stability()

        if horizon < 0:
            raise ValueError("The horizon must be non-negative.")

        if n_sequences < 1:
            raise ValueError("At least one sequence must be simulated.")

        self.__params = params
        self.__horizon = float(horizon)
        self.__n_sequences = int(n_sequences)
        self.__seed = int(seed)
        self.__verbose = verbose

    @property
    def params(self) -> HawkesParams:
        return self.__params

    @property
    def horizon(self) -> float:
        return self.__horizon

    @property
    def number_of_sequences(self) -> int:
        return self.__n_sequences

    def simulate(self, index: int) -> EventSequence:
        """
        Runs the simulation of a given index
        """
        seed = np.random.SeedSequence([self.__seed, index])
        return simulate_hawkes(self.__params, self.__horizon, seed, seq_id=str(index))

    def __generate_static_scheduling(self, cores: int) -> List[Tuple[int, int]]:
        """
        Given a number of cores, generate in a static scheduling fashion the start and end
        indices of the simulations assigned to each worker.
        """
        surplus = self.__n_sequences % cores
        steps = (self.__n_sequences - surplus) // cores
        end_points = [(i + 1) * steps for i in range(cores)]
        end_points[-1] += surplus

        return [
            (0 if core == 0 else end_points[core - 1], end_points[core]) for core in range(cores)
        ]

    def on_the_fly_dataset(self, cores: int = 1) -> Dataset:
        """
        Runs all the simulations and returns them as a dataset in raw time units (time scale 1)

        Parameters
        ----------
        cores: int
            the number of worker processes. If set to `-1` all the cores available on the
            machine are used (default: 1, no worker process)

        Raises
        ------
        ValueError
            exception raised if the number of cores selected by the user is invalid

        Returns
        -------
        Dataset
            the simulated sequences, ordered by index
        """
        if cores == -1:
            cores = cpu_count()
        elif cores <= 0:
            raise ValueError("Invalid number of cores selected.")

        cores = min(cores, self.__n_sequences)

        if self.__verbose:
            print(f"\nSimulating {self.__n_sequences} sequences with {self.__params}")
            print(f" -> horizon: {self.__horizon}")
            print(f" -> cores: {cores}")
            print("")

        tasks = [Task(self, start, end) for start, end in self.__generate_static_scheduling(cores)]

        if cores == 1:
            results = [job_engine(task) for task in tasks]
        else:
            with Pool(processes=cores) as pool:
                results = pool.map(job_engine, tasks)

        sequences = [sequence for result in results for sequence in result]

        if self.__verbose:
            print(f" -> generated {sum(len(s) for s in sequences)} events")

        return Dataset(sequences, self.__params.num_types, 1.0)

    def save_dataset(self, path: str, cores: int = 1) -> Dataset:
        """
        Runs all the simulations and writes them to a CSV file in the standard event schema

        Parameters
        ----------
        path: str
            the destination file
        cores: int
            the number of worker processes, `-1` for all the available cores (default: 1)

        Returns
        -------
        Dataset
            the simulated dataset
        """
        dataset = self.on_the_fly_dataset(cores)
        write_csv(dataset, path)
        return dataset


@dataclass
class Task:
    """
    Simple dataclass to hold the range of simulations run by a worker.

    Parameters
    ----------
    gen: SequenceGenerator
        the generator holding the process parameters
    start: int
        the first simulation index (included)
    end: int
        the last simulation index (excluded)
    """

    gen: SequenceGenerator
    start: int
    end: int


def job_engine(task: Task) -> List[EventSequence]:
    """
    Runs all the simulations encoded by a task and returns the generated sequences
    """
    return [task.gen.simulate(index) for index in range(task.start, task.end)]
