import logging

import numpy as np

from src.exceptions import ConfigException
from src.fredholm import (
    dist_f1,
    dist_f2,
    dist_finite_n,
    dist_goe2,
    dist_transition,
)
from src.kernels import SourceSpec
from src.special import std_normal_cdf
from src.stats import TabulatedCdf, empirical_cdf, ks_distance

logger = logging.getLogger(__name__)

REFERENCES = ("F2", "GOE2", "F1", "GAUSS", "TRANSITION", "FINITE")
# 极限分布的制表范围
LIMIT_GRID = (-8.0, 6.0, 0.1)


class Worker:
    """
    One experiment. `block_def["input"]` declares the inputs; `handler`
    receives {"taskId", "taskType", "inputData"} and a context with seed,
    workers and quad_order, and returns {"table", "summary", "reference"}.
    """
    block_name = None
    block_def = {}

    def handler(self, task, context):
        raise NotImplementedError

    def log_start(self, task):
        logger.info(
            f"开始执行任务：task_id={task.get('taskId')}, task_type={task.get('taskType')}"
        )
        logger.debug(task.get("inputData"))


def number_input(name, display_name, default=None, required=False, description=None, **limits):
    spec = {
        "displayName": display_name,
        "name": name,
        "type": 'number',
        "default": default,
        "required": required,
    }
    if description:
        spec["description"] = description
    if limits:
        spec["typeOptions"] = limits
    return spec


def options_input(name, display_name, values, default, description=None):
    spec = {
        "displayName": display_name,
        "name": name,
        "type": 'options',
        "options": [{"name": v, "value": v} for v in values],
        "default": default,
        "required": True,
    }
    if description:
        spec["description"] = description
    return spec


def output_spec(table_display, summary_fields):
    """
    block_def["output"]: the data table, the summary (with the keys every
    run reports) and the reference descriptor.
    """
    return [
        {
            "name": 'table',
            "displayName": table_display,
            "type": 'collection',
        },
        {
            "name": 'summary',
            "displayName": '统计摘要',
            "type": 'json',
            "properties": [
                {"name": name, "displayName": display_name, "type": kind}
                for name, display_name, kind in summary_fields
            ],
        },
        {
            "name": 'reference',
            "displayName": '参考分布',
            "type": 'json',
        },
    ]


def summary_keys(block_def):
    for spec in block_def.get("output", []):
        if spec["name"] == "summary":
            return [p["name"] for p in spec.get("properties", [])]
    return []


def source_from_inputs(input_data, n_key="N"):
    """SourceSpec from an explicit eps list or a rank-1 Lambda."""
    eps = input_data.get("eps")
    lam = input_data.get("Lambda")
    n = input_data.get(n_key)
    if eps and lam is not None:
        raise ConfigException("eps 与 Lambda 只能指定一个")
    if eps:
        if n is not None and len(eps) != n:
            # 只给出前几个 ε，其余补 0
            if len(eps) > n:
                raise ConfigException(f"eps 的个数 {len(eps)} 超过 N={n}")
            eps = list(eps) + [0.0] * (n - len(eps))
        return SourceSpec.from_list(eps)
    if lam is not None:
        return SourceSpec.from_lambda(n, lam)
    return SourceSpec.zero(n)


def chain_source(input_data, n_key="N"):
    """
    Source for the matrix chain, whose first matrix is centred at V/2: an
    explicit eps list, omega (critical at 0), or Lambda on the scale of H + V.
    """
    n = input_data.get(n_key)
    omega = input_data.get("omega")
    lam = input_data.get("Lambda")
    if omega is not None and (lam is not None or input_data.get("eps")):
        raise ConfigException("omega 不能与 eps 或 Lambda 同时指定")
    if omega is not None:
        return SourceSpec.from_omega(n, omega)
    if lam is not None and not input_data.get("eps"):
        return SourceSpec.from_lambda(n, 2.0 * lam)
    return source_from_inputs(input_data, n_key)


def reference_cdf(reference, quad_order, omega=0.0, tau=0.0, src=None, support=None, edge=False):
    """
    Callable CDF for a reference law, tabulated on a grid and interpolated
    monotonically where the analytic route is a Fredholm determinant.
    """
    if reference == "GAUSS":
        return std_normal_cdf
    lo, hi, step = LIMIT_GRID
    if reference == "F2":
        return TabulatedCdf.from_function(lambda s: dist_f2(s, quad_order), lo, hi, step)
    if reference == "GOE2":
        return TabulatedCdf.from_function(lambda s: dist_goe2(s, quad_order), lo, hi, step)
    if reference == "F1":
        return TabulatedCdf.from_function(lambda s: dist_f1(s, quad_order), lo, hi, step)
    if reference == "TRANSITION":
        return TabulatedCdf.from_function(
            lambda s: dist_transition(s, omega, tau, quad_order), lo, hi, step
        )
    if reference == "FINITE":
        if src is None or support is None:
            raise ConfigException("FINITE 参考分布需要 source 与样本范围")
        lo, hi = np.floor(support[0]) - 1.0, np.ceil(support[1]) + 1.0
        return TabulatedCdf.from_function(
            lambda s: dist_finite_n(s, src, quad_order, edge=edge), lo, hi, (hi - lo) / 200.0
        )
    raise ConfigException(f"未知的参考分布：{reference}，可选 {REFERENCES}")


def ks_against(samples, cdf):
    return ks_distance(empirical_cdf(samples), cdf)
