import logging
from concurrent.futures import ProcessPoolExecutor, as_completed

import pandas as pd
from tqdm import tqdm

from src.config import lab_environment
from src.utils import chunk_list

logger = logging.getLogger(__name__)


def consume_task(task_data):
    """Run one chunk of sample streams; the task returns a DataFrame."""
    task = task_data['task']
    streams = task_data['streams']
    logger.debug(f"处理 streams {streams[0]}..{streams[-1]}")
    return task(task_data['params'], task_data['seed'], streams)


def submit_streams(task, params, seed, n_samples, workers=None, chunk_size=None,
                   description=None):
    """
    Split stream indices 0..n_samples-1 into chunks and run them inline
    (workers == 1) or on a process pool. Chunks are reassembled in stream
    order, so the result does not depend on the worker count.
    """
    if workers is None or chunk_size is None:
        env = lab_environment()
        workers = env.workers if workers is None else workers
        chunk_size = env.chunk_size if chunk_size is None else chunk_size
    chunks = chunk_list(list(range(n_samples)), chunk_size)
    tasks = [
        {"task": task, "params": params, "seed": seed, "streams": streams}
        for streams in chunks
    ]
    results = [None] * len(tasks)
    progress = tqdm(total=n_samples, desc=description, disable=None)
    try:
        if workers <= 1:
            for index, task_data in enumerate(tasks):
                results[index] = consume_task(task_data)
                progress.update(len(task_data['streams']))
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futures = {
                    pool.submit(consume_task, task_data): index
                    for index, task_data in enumerate(tasks)
                }
                for future in as_completed(futures):
                    index = futures[future]
                    results[index] = future.result()
                    progress.update(len(tasks[index]['streams']))
    finally:
        progress.close()
    logger.info(f"完成 {n_samples} 个样本（{len(tasks)} 个分块，workers={workers}）")
    return pd.concat(results, ignore_index=True)
