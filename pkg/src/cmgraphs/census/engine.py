"""センサスのジョブキュー。

CensusEngine は ScanJob を asyncio のキューに積み、ワーカーが検査関数を
実行して ScanOutcome を集めます。mpmath の作業精度はプロセス全体の状態なので、
並列実行はスレッドではなくプロセスプールで行います（workers = 0 なら
イベントループ上で順に実行）。結果は (複雑さ, キー) で並べ替えて返すので、
ワーカー数によらず同じ報告になります。

例:
    >>> engine = CensusEngine(workers=2)
    >>> outcomes = engine.run_sync(jobs, functools.partial(classify_job, cs, config))
"""

import asyncio
from concurrent.futures import Executor, ProcessPoolExecutor
from typing import Callable, List, Optional, Sequence

from ..core.errors import IndeterminateError, InvalidInputError
from ..core.events import ScanJob, ScanOutcome
from ..utils.logger import get_logger

logger = get_logger(__name__)

Handler = Callable[[ScanJob], ScanOutcome]


def run_guarded(handler: Handler, job: ScanJob) -> ScanOutcome:
    """handler を実行し、判定不能を ScanOutcome.error に変える。"""
    try:
        return handler(job)
    except IndeterminateError as exc:
        return ScanOutcome(job.key, job.complexity, job.kind, error=str(exc))


class CensusEngine:
    """ScanJob を処理するワーカーの集まり。

    Attributes:
        workers: プロセス数。0 ならイベントループ上で逐次実行。
    """

    def __init__(self, workers: int = 0) -> None:
        if workers < 0:
            raise InvalidInputError("workers must be >= 0")
        self.workers = workers
        self._running = False

    @property
    def running(self) -> bool:
        return self._running

    async def run(self, jobs: Sequence[ScanJob], handler: Handler) -> List[ScanOutcome]:
        """すべてのジョブを処理し、(複雑さ, キー) 順の結果を返します。

        handler はプロセスプールで使う場合は pickle できる必要があります
        （モジュールレベルの関数か、その functools.partial）。
        """
        queue: asyncio.Queue[ScanJob] = asyncio.Queue()
        for job in sorted(jobs, key=ScanJob.sort_key):
            queue.put_nowait(job)
        results: List[ScanOutcome] = []
        executor: Optional[Executor] = None
        if self.workers > 0:
            executor = ProcessPoolExecutor(max_workers=self.workers)
        self._running = True
        try:
            consumers = [
                asyncio.create_task(self._consume(queue, handler, executor, results))
                for _ in range(max(1, self.workers))
            ]
            await asyncio.gather(*consumers)
        finally:
            self._running = False
            if executor is not None:
                executor.shutdown(wait=True)
        failed = sum(1 for r in results if r.indeterminate)
        logger.info("census: %d jobs done, %d indeterminate", len(results), failed)
        return sorted(results, key=ScanOutcome.sort_key)

    def run_sync(self, jobs: Sequence[ScanJob], handler: Handler) -> List[ScanOutcome]:
        return asyncio.run(self.run(jobs, handler))

    async def _consume(
        self,
        queue: "asyncio.Queue[ScanJob]",
        handler: Handler,
        executor: Optional[Executor],
        results: List[ScanOutcome],
    ) -> None:
        loop = asyncio.get_running_loop()
        while True:
            try:
                job = queue.get_nowait()
            except asyncio.QueueEmpty:
                return
            try:
                if executor is None:
                    outcome = run_guarded(handler, job)
                else:
                    outcome = await loop.run_in_executor(
                        executor, run_guarded, handler, job
                    )
                results.append(outcome)
                logger.debug("job %s done (error=%s)", job.key, outcome.error)
            finally:
                queue.task_done()
            # 逐次実行でも他のタスクに制御を返す
            await asyncio.sleep(0)
