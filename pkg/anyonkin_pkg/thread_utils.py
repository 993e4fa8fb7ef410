#!/usr/bin/python3

# Copyright (C) 2020 Miguel Simoes, miguelrsimoes[a]yahoo[.]com
# For conditions of distribution and use, see copyright notice in anyonkin.py

"""
Included:

An abstract class that provides producer-consumer synchronized threading with a
buffer size of one datum. The step loop produces diagnostics records, a single
writer thread consumes them.

A slab executor that splits the x-nodes into contiguous slabs and runs a task
per slab in threads. Each task writes to a disjoint slice, so the result does
not depend on the number of workers.
"""

import abc
import threading

class NoMoreData(Exception):
    pass

class ProducerConsumerThreaded:
    """
    Coordinate data Producer and Consumer threads.
    An exception on either side stops both and is re-raised by run().
    """

    def __init__(self, main_thread="producer"):
        """
        main_thread = either "consumer" or "producer".
        Only the main thread gets the KeyboardInterrupt SIGINT signal.
        """
        assert main_thread in ("consumer", "producer"), \
            "ProducerConsumerThreaded.__init__ unexpected thread id"
        self.ready_for_data = threading.Event()
        self.ready_for_data.set()
        self.data_is_available = threading.Event() # Set also at NoMoreData.
        self.done = False
        self.datum = None
        self._failure = None
        if main_thread == "consumer":
            self._primary_loop = self._consumer_loop
            self._secondary_loop = self._producer_loop
        else:
            self._primary_loop = self._producer_loop
            self._secondary_loop = self._consumer_loop
        self._secondary_thread = threading.Thread(target=self._secondary_loop)

    def run(self):
        self._secondary_thread.start()
        try:
            self._primary_loop()
        finally:
            self._secondary_thread.join()
        if self._failure is not None:
            raise self._failure

    def _stop(self, exc):
        if self._failure is None:
            self._failure = exc
        self.done = True
        self.data_is_available.set()
        self.ready_for_data.set()

    def _producer_loop(self):
        try:
            while True:
                try:
                    datum = self.produce()
                except NoMoreData:
                    self.ready_for_data.wait()
                    self.done = True
                    self.data_is_available.set()
                    break
                self.ready_for_data.wait()
                self.ready_for_data.clear()
                if self.done:
                    break
                self.datum = datum
                self.data_is_available.set()
        except KeyboardInterrupt:
            self._stop(None)
            raise
        except BaseException as exc: # pylint: disable=broad-except
            self._stop(exc)

    def _consumer_loop(self):
        try:
            while True:
                self.data_is_available.wait()
                self.data_is_available.clear()
                if self.done:
                    break
                datum = self.datum
                self.ready_for_data.set()
                self.consume(datum)
        except KeyboardInterrupt:
            self._stop(None)
            raise
        except BaseException as exc: # pylint: disable=broad-except
            self._stop(exc)

    @abc.abstractmethod
    def produce(self):
        """
        Either return a datum or raise NoMoreData.
        """

    @abc.abstractmethod
    def consume(self, datum):
        """
        Use the given datum.
        """

def slab_bounds(n_nodes, workers):
    """
    Return the (start, stop) pairs of at most workers contiguous slabs.
    """
    workers = max(1, min(workers, n_nodes))
    base, extra = divmod(n_nodes, workers)
    bounds = []
    start = 0
    for k in range(workers):
        stop = start + base + (1 if k < extra else 0)
        bounds.append((start, stop))
        start = stop
    return bounds

def slab_executor(fn_task, n_nodes, workers):
    """
    Call fn_task(start, stop) for each slab, in threads if workers > 1.
    The first exception raised by a task is re-raised after all threads join.
    """
    bounds = slab_bounds(n_nodes, workers)
    if len(bounds) == 1:
        fn_task(*bounds[0])
        return
    failures = []

    def run_one(start, stop):
        try:
            fn_task(start, stop)
        except BaseException as exc: # pylint: disable=broad-except
            failures.append(exc)

    threads = [threading.Thread(target=run_one, args=b) for b in bounds[1:]]
    for thread in threads:
        thread.start()
    try:
        run_one(*bounds[0])
    finally:
        for thread in threads:
            thread.join()
    if failures:
        raise failures[0]
