import itertools
import logging

import numpy as np

from src.exceptions import ConfigException
from src.kernels import ExtendedKernel
from src.queue import submit_streams
from src.worker.blocks import Worker, chain_source, number_input, options_input, output_spec
from src.worker.blocks.dist_eval import GRID_CHUNK, evaluate_thresholds

logger = logging.getLogger(__name__)

KERNELS = ("AIRY", "TRANSITION", "FINITE")


def joint_kernel(name, input_data, times):
    if name == "AIRY":
        return ExtendedKernel.airy()
    if name == "TRANSITION":
        return ExtendedKernel.transition(input_data.get('omega') or 0.0)
    if name == "FINITE":
        return ExtendedKernel.finite_dynamical(
            chain_source(input_data), times,
            edge=bool(input_data.get('edge')),
        )
    raise ConfigException(f"未知的 kernel：{name}，可选 {KERNELS}")


class DistJointWorker(Worker):
    block_name = 'dist-joint'
    block_def = {
        "type": "SIMPLE",
        "name": block_name,
        "displayName": '多时间联合分布函数表',
        "description": '在阈值乘积网格上计算 P[λ(τ_j) <= s_j, j = 1..M] 的 Fredholm 行列式',
        "input": [
            options_input('kernel', 'kernel', KERNELS, 'AIRY'),
            {
                "displayName": '使用有限 N 的 Dyson 链 kernel（等价于 kernel=FINITE）',
                "name": 'finite_n',
                "type": 'boolean',
                "default": False,
                "required": False,
            },
            {
                "displayName": '时间点（逗号分隔，严格递增）',
                "name": 'times',
                "type": 'list',
                "default": '0,0.7',
                "required": True,
            },
            {
                "displayName": '每个时间上的 s 网格（取乘积）',
                "name": 's',
                "type": 'grid',
                "default": '-2:2:1',
                "required": True,
            },
            number_input('omega', '过渡参数 ω（TRANSITION）或链的临界窗口参数（FINITE）', None, False),
            {
                "displayName": '矩阵维数 N（FINITE）',
                "name": 'N',
                "type": 'integer',
                "default": 2,
                "required": False,
                "typeOptions": {"minValue": 1},
            },
            {
                "displayName": '外源对角元 ε（逗号分隔，不足 N 个补 0）',
                "name": 'eps',
                "type": 'list',
                "default": None,
                "required": False,
            },
            number_input('Lambda', '秩一外源强度 Λ（与 H+V 同一标度）', None, False, minValue=0.0),
            {
                "displayName": 'FINITE 使用边缘标度坐标',
                "name": 'edge',
                "type": 'boolean',
                "default": False,
                "required": False,
            },
        ],
        "output": output_spec('联合分布函数取值', [
            ("kernel", "kernel 类型", "string"),
            ("times", "时间", "json"),
            ("rows", "网格点数", "number"),
            ("max_error", "最大误差估计", "number"),
        ]),
    }

    def handler(self, task, context):
        self.log_start(task)
        input_data = task.get("inputData")
        name = "FINITE" if input_data.get('finite_n') else input_data.get('kernel')
        times = tuple(input_data.get('times'))
        if not times:
            raise ConfigException("times 不能为空", key="times")
        if name == "TRANSITION" and input_data.get('omega') is None:
            logger.info("未指定 omega，TRANSITION 使用 ω = 0")
        kernel = joint_kernel(name, input_data, times)
        kernel.validate_times(times)
        grid = [float(s) for s in input_data.get('s')]
        thresholds = list(itertools.product(grid, repeat=len(times)))
        params = {
            "kernel": kernel,
            "times": times,
            "thresholds": thresholds,
            "quad_order": context["quad_order"],
        }
        logger.info(f"联合分布：kernel={name}, M={len(times)}, 阈值组合 {len(thresholds)} 个")
        table = submit_streams(
            evaluate_thresholds, params, context["seed"], len(thresholds),
            context["workers"], chunk_size=GRID_CHUNK, description=self.block_name,
        )
        summary = {
            "kernel": name,
            "times": list(times),
            "rows": len(table),
            "max_error": float(table["error"].max()),
            "min_value": float(np.min(table["value"])),
            "max_value": float(np.max(table["value"])),
        }
        reference = {"name": "JOINT", "times": list(times), "edge": bool(input_data.get('edge'))}
        return {"table": table, "summary": summary, "reference": reference}
