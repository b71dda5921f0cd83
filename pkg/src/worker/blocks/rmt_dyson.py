import logging

import numpy as np
import pandas as pd

from src.kernels import TimeGrid
from src.queue import submit_streams
from src.rmt import edge_scale, sample_dyson_chain
from src.utils import stream_rng
from src.worker.blocks import Worker, chain_source, number_input, output_spec

logger = logging.getLogger(__name__)


def sample_dyson(params, seed, streams):
    n = params['N']
    grid = TimeGrid(tuple(params['times']))
    src = params['source']
    top = np.empty((len(streams), len(grid)))
    for i, stream in enumerate(streams):
        spectra = sample_dyson_chain(n, src, grid, stream_rng(seed, stream))
        top[i] = spectra[:, -1]
    data = {"sample": streams}
    for j in range(len(grid)):
        data[f"lambda1_{j}"] = top[:, j]
    if params['edge']:
        for j in range(len(grid)):
            data[f"X_{j}"] = edge_scale(top[:, j], n)
    return pd.DataFrame(data)


class RmtDysonWorker(Worker):
    block_name = 'rmt-dyson'
    block_def = {
        "type": "SIMPLE",
        "name": block_name,
        "displayName": '带外源的 Dyson 布朗运动',
        "description": '矩阵 OU 链 H₁ = GUE + V/2 在给定时间上的最大特征值',
        "input": [
            {
                "displayName": '矩阵维数 N',
                "name": 'N',
                "type": 'integer',
                "default": 2,
                "required": True,
                "typeOptions": {"minValue": 1},
            },
            {
                "displayName": '时间点（逗号分隔，从 0 开始严格递增）',
                "name": 'times',
                "type": 'list',
                "default": '0,0.7',
                "required": True,
            },
            {
                "displayName": '外源对角元 ε（逗号分隔，不足 N 个补 0）',
                "name": 'eps',
                "type": 'list',
                "default": None,
                "required": False,
            },
            number_input('Lambda', '秩一外源强度 Λ（与 H+V 同一标度）', None, False, minValue=0.0),
            number_input('omega', '临界窗口参数 ω', None, False, 'ε₁ = sqrt(2N)(1 - ωN^{-1/3})'),
            {
                "displayName": '样本数',
                "name": 'samples',
                "type": 'integer',
                "default": 1000,
                "required": True,
                "typeOptions": {"minValue": 1},
            },
            {
                "displayName": '输出边缘标度列 X_j',
                "name": 'edge',
                "type": 'boolean',
                "default": False,
                "required": False,
            },
        ],
        "output": output_spec('各时刻最大特征值样本', [
            ("times", "时间网格", "json"),
            ("epsilons", "外源", "json"),
            ("means", "各时刻均值", "json"),
        ]),
    }

    def handler(self, task, context):
        self.log_start(task)
        input_data = task.get("inputData")
        n = input_data.get('N')
        times = input_data.get('times')
        grid = TimeGrid(tuple(times))
        src = chain_source(input_data)
        edge = bool(input_data.get('edge'))
        params = {"N": n, "times": list(grid.times), "source": src, "edge": edge}
        table = submit_streams(
            sample_dyson, params, context["seed"], input_data.get('samples'),
            context["workers"], description=self.block_name,
        )
        prefix = "X" if edge else "lambda1"
        columns = [f"{prefix}_{j}" for j in range(len(grid))]
        summary = {
            "times": list(grid.times),
            "epsilons": list(src.epsilons),
            "means": [float(table[c].mean()) for c in columns],
        }
        reference = {
            "name": "JOINT",
            "columns": columns,
            "times": list(grid.times),
            "edge": edge,
        }
        return {"table": table, "summary": summary, "reference": reference}
