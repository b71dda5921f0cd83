import logging

import numpy as np
import pandas as pd

from src.exceptions import ConfigException
from src.fredholm import DeterminantProblem, evaluate
from src.kernels import ExtendedKernel
from src.queue import submit_streams
from src.special import std_normal_cdf
from src.stats import TabulatedCdf, distribution_moments
from src.worker.blocks import Worker, number_input, options_input, output_spec, source_from_inputs

logger = logging.getLogger(__name__)

LAWS = ("F2", "GOE2", "F1", "TRANSITION", "FINITE", "GAUSS")
GRID_CHUNK = 8
# 表格两端的 CDF 在此范围内才计算矩
MOMENT_MASS = 1e-4


def evaluate_thresholds(params, seed, streams):
    """
    Fredholm determinants at params['thresholds'][i] for i in streams.
    A 'sqrt' transform turns a GOE² value into F1.
    """
    kernel = params['kernel']
    rows = []
    for index in streams:
        thresholds = params['thresholds'][index]
        if kernel is None:
            value, error = float(std_normal_cdf(thresholds[0])), 0.0
        else:
            problem = DeterminantProblem(
                kernel, params['times'], thresholds, params['quad_order']
            )
            result = evaluate(problem)
            value, error = result.value, result.error
        if params.get('transform') == 'sqrt':
            # |√a - √b| <= √|a - b|
            value, error = float(np.sqrt(value)), float(np.sqrt(error))
        rows.append([*thresholds, value, error])
    columns = [f"s_{j}" for j in range(len(params['times']))] + ["value", "error"]
    return pd.DataFrame(rows, columns=columns)


def single_time_kernel(which, input_data):
    """(kernel, tau, transform) for a one-point law; kernel None means closed form."""
    if which == "F2":
        return ExtendedKernel.airy(), 0.0, None
    if which == "GOE2":
        return ExtendedKernel.goe2(), 0.0, None
    if which == "F1":
        return ExtendedKernel.goe2(), 0.0, 'sqrt'
    if which == "TRANSITION":
        return ExtendedKernel.transition(input_data.get('omega')), input_data.get('tau'), None
    if which == "FINITE":
        src = source_from_inputs(input_data)
        return ExtendedKernel.finite_static(src, edge=bool(input_data.get('edge'))), 0.0, None
    if which == "GAUSS":
        lam = input_data.get('Lambda')
        if lam is None:
            return None, 0.0, None
        return ExtendedKernel.gauss_limit(lam), 0.0, None
    raise ConfigException(f"未知的分布：{which}，可选 {LAWS}")


def cdf_summary(grid, values):
    values = np.asarray(values, dtype=float)
    summary = {
        "monotone": bool(np.all(np.diff(values) >= -1e-10)),
        "mean": None,
        "variance": None,
    }
    if len(grid) > 1 and values[0] < MOMENT_MASS and values[-1] > 1.0 - MOMENT_MASS:
        cdf = TabulatedCdf(grid, values)
        summary["mean"], summary["variance"] = distribution_moments(cdf, grid[0], grid[-1])
    if not summary["monotone"]:
        logger.warning("CDF 表格不单调，请检查 quad_order")
    return summary


class DistEvalWorker(Worker):
    block_name = 'dist-eval'
    block_def = {
        "type": "SIMPLE",
        "name": block_name,
        "displayName": '单点分布函数表',
        "description": '用 Fredholm 行列式在 s 网格上计算 F2 / GOE² / F1 / 过渡分布 / 有限 N 分布',
        "input": [
            options_input('which', '分布', LAWS, 'F2'),
            {
                "displayName": 's 网格（lo:hi:step 或逗号分隔）',
                "name": 's',
                "type": 'grid',
                "default": '-6:3:0.05',
                "required": True,
            },
            number_input('omega', '过渡参数 ω', 0.0, False),
            number_input('tau', '位置 τ', 0.0, False),
            {
                "displayName": '矩阵维数 N（FINITE / GAUSS）',
                "name": 'N',
                "type": 'integer',
                "default": 4,
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
            number_input('Lambda', '秩一外源强度 Λ', None, False, minValue=0.0),
            {
                "displayName": 'FINITE 使用边缘标度坐标',
                "name": 'edge',
                "type": 'boolean',
                "default": False,
                "required": False,
            },
        ],
        "output": output_spec('分布函数取值', [
            ("which", "分布", "string"),
            ("rows", "网格点数", "number"),
            ("max_error", "最大误差估计", "number"),
            ("monotone", "是否单调", "boolean"),
            ("mean", "均值", "number"),
            ("variance", "方差", "number"),
        ]),
    }

    def handler(self, task, context):
        self.log_start(task)
        input_data = task.get("inputData")
        which = input_data.get('which')
        grid = np.asarray(input_data.get('s'), dtype=float)
        kernel, tau, transform = single_time_kernel(which, input_data)
        params = {
            "kernel": kernel,
            "times": (tau,),
            "thresholds": [(float(s),) for s in grid],
            "quad_order": context["quad_order"],
            "transform": transform,
        }
        table = submit_streams(
            evaluate_thresholds, params, context["seed"], len(grid),
            context["workers"], chunk_size=GRID_CHUNK, description=self.block_name,
        )
        table = table.rename(columns={"s_0": "s"})
        summary = {
            "which": which,
            "rows": len(table),
            "max_error": float(table["error"].max()),
            **cdf_summary(grid, table["value"].to_numpy()),
        }
        logger.info(f"{which} 计算完成：{len(table)} 个点，最大误差 {summary['max_error']:.2e}")
        return {"table": table, "summary": summary, "reference": None}
