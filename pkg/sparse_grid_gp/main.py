from multiprocessing import Process, Queue
from typing import Optional

from sparse_grid_gp.bench import run_study
from sparse_grid_gp.exceptions import ConfigError
from sparse_grid_gp.pipelines import ReportPipeline


class Bench:
    """
    A class used to run one benchmark study in a child process.
    ...

    Attributes
    ----------
    query : dict
        query dictionary that contains type and config
    output : str
        optional path of the report CSV written after the run

    Methods
    -------
    run()
        Runs the study and returns its reports
    start_bench(query, output_queue)
        Child-process entry point; puts the reports (or the raised error) on the queue
    """

    def __init__(self, query: Optional[dict] = None, output: Optional[str] = None):
        """
        Args:
            query (dict): A dict naming the study and its config overrides.\n
            for rmspe:- {"type": "rmspe", "config": {"d": 4, "etas": [5, 6, 7]}}\n
            for mape:- {"type": "mape", "config": {"function": "product_peak"}}\n
            for timing:- {"type": "timing", "config": {"d": 10, "eta": 14}}\n
            Defaults to {"type": None}.
            output (str, optional): report CSV path. Defaults to None.
        """
        self.output_queue = None
        self.query = query if query is not None else {"type": None}
        self.output = output

    def run(self) -> list:
        """Runs the study in a child process

        Raises:
            SparseGridError: re-raised from the child process

        Returns:
            list[ExperimentReport]: reports in arm order
        """
        self.output_queue = Queue()
        process = Process(target=self.start_bench, args=(self.query, self.output_queue))
        process.start()
        result = self.output_queue.get()
        process.join()
        if isinstance(result, BaseException):
            raise result
        pipeline = ReportPipeline(self.output)
        for item in result:
            pipeline.process_item(item)
        pipeline.close()
        return pipeline.items

    def start_bench(self, query, output_queue):
        try:
            if query.get("type") is None:
                raise ConfigError("Invalid Type")
            output_queue.put(run_study(query["type"], query.get("config")))
        except Exception as exc:
            output_queue.put(exc)
