import logging

from src.config import ExperimentConfig
from src.exceptions import ConfigException, ConsistencyException
from src.output import write_table
from src.utils import config_fingerprint, package_versions
from .blocks import summary_keys
from .blocks.compare import CompareWorker
from .blocks.dist_eval import DistEvalWorker
from .blocks.dist_joint import DistJointWorker
from .blocks.png_height import PngHeightWorker
from .blocks.png_layers import PngLayersWorker
from .blocks.rmt_dyson import RmtDysonWorker
from .blocks.rmt_edge import RmtEdgeWorker

logger = logging.getLogger(__name__)

WORKERS = {}


def register_worker(worker):
    if worker.block_name in WORKERS:
        raise ConfigException(f"实验 {worker.block_name} 已经注册过")
    WORKERS[worker.block_name] = worker
    return worker


def get_worker(name):
    worker = WORKERS.get(name)
    if worker is None:
        raise ConfigException(f"未知的实验：{name}，可选 {sorted(WORKERS)}")
    return worker


def run_experiment(config: ExperimentConfig):
    """
    Run one experiment, write its data file and return the summary.
    The task id is the fingerprint of the config echo, so reruns of the same
    configuration share it.
    """
    worker = get_worker(config.experiment)
    echo = config.echo()
    fingerprint = config_fingerprint(echo)
    task = {
        "taskId": fingerprint,
        "taskType": worker.block_name,
        "inputData": dict(config.parameters),
    }
    context = {
        "seed": config.seed,
        "workers": config.workers,
        "quad_order": config.quad_order,
    }
    result = worker.handler(task, context)
    missing = [k for k in summary_keys(worker.block_def) if k not in result["summary"]]
    if missing:
        raise ConsistencyException(f"{worker.block_name} 没有给出声明的输出：{missing}")
    metadata = {
        "experiment": config.experiment,
        "config": echo,
        "versions": package_versions(),
        "reference": result.get("reference"),
        "summary": result.get("summary"),
        "fingerprint": fingerprint,
    }
    path = write_table(result["table"], metadata, config.output_path, config.format)
    logger.info(f"任务完成：task_id={fingerprint}, task_type={worker.block_name}")
    return {**result["summary"], "output": path}


register_worker(CompareWorker())
register_worker(DistEvalWorker())
register_worker(DistJointWorker())
register_worker(PngHeightWorker())
register_worker(PngLayersWorker())
register_worker(RmtDysonWorker())
register_worker(RmtEdgeWorker())
