import logging

import numpy as np
import pandas as pd

from src.exceptions import ConfigException, DomainException
from src.kernels import gaussian_regime_width
from src.rmt import (
    edge_scale,
    edge_scale_gaussian,
    edge_unscale,
    largest_eigenvalue,
    sample_goe,
    sample_goe2_edge,
    sample_gue,
    sample_source_matrix,
)
from src.queue import submit_streams
from src.utils import stream_rng
from src.worker.blocks import (
    Worker,
    ks_against,
    number_input,
    options_input,
    output_spec,
    reference_cdf,
    source_from_inputs,
)

logger = logging.getLogger(__name__)

ENSEMBLES = ("gue", "goe", "goe2", "source")
SCALINGS = ("edge", "gaussian", "none")


def sample_rmt_edge(params, seed, streams):
    n = params['N']
    ensemble = params['ensemble']
    src = params.get('source')
    lambda1 = np.empty(len(streams))
    scaled = np.empty(len(streams))
    for i, stream in enumerate(streams):
        rng = stream_rng(seed, stream)
        if ensemble == "goe2":
            scaled[i] = sample_goe2_edge(n, rng)
            lambda1[i] = edge_unscale(scaled[i], n)
            continue
        if ensemble == "gue":
            m = sample_gue(n, rng)
        elif ensemble == "goe":
            m = sample_goe(n, rng)
        else:
            m = sample_source_matrix(n, src, rng)
        lambda1[i] = largest_eigenvalue(m)
    if ensemble != "goe2":
        scaling = params['scaling']
        if scaling == "edge":
            scaled = edge_scale(lambda1, n)
        elif scaling == "gaussian":
            scaled = edge_scale_gaussian(lambda1, n, params['Lambda'])
        else:
            scaled = lambda1.copy()
    return pd.DataFrame({"sample": streams, "lambda1": lambda1, "X": scaled})


def rmt_reference(ensemble, scaling, lam):
    if ensemble == "gue":
        return "F2"
    if ensemble == "goe":
        return "F1"
    if ensemble == "goe2":
        return "GOE2"
    if scaling == "gaussian":
        return "GAUSS"
    if scaling == "none" or lam is None:
        return "FINITE"
    if lam < 1:
        return "F2"
    if lam == 1:
        return "GOE2"
    return None


class RmtEdgeWorker(Worker):
    block_name = 'rmt-edge'
    block_def = {
        "type": "SIMPLE",
        "name": block_name,
        "displayName": '随机矩阵最大特征值',
        "description": '采样 GUE / GOE / GOE² / 带外源 H+V 的最大特征值，并按边缘或高斯区标度',
        "input": [
            options_input('ensemble', '矩阵系综', ENSEMBLES, 'source'),
            {
                "displayName": '矩阵维数 N',
                "name": 'N',
                "type": 'integer',
                "default": 100,
                "required": True,
                "typeOptions": {"minValue": 1},
            },
            {
                "displayName": '样本数',
                "name": 'samples',
                "type": 'integer',
                "default": 1000,
                "required": True,
                "typeOptions": {"minValue": 1},
            },
            number_input('Lambda', '秩一外源强度 Λ', None, False, 'ε₁ = Λ·sqrt(N/2)', minValue=0.0),
            {
                "displayName": '外源对角元 ε（逗号分隔，不足 N 个补 0）',
                "name": 'eps',
                "type": 'list',
                "default": None,
                "required": False,
            },
            options_input('scaling', '标度方式', SCALINGS, 'edge'),
            {
                "displayName": '计算 KS 距离',
                "name": 'ks',
                "type": 'boolean',
                "default": True,
                "required": False,
            },
        ],
        "output": output_spec('最大特征值样本', [
            ("ensemble", "矩阵系综", "string"),
            ("scaling", "标度方式", "string"),
            ("mean_lambda1", "最大特征值均值", "number"),
            ("mean_X", "标度变量均值", "number"),
            ("var_X", "标度变量方差", "number"),
        ]),
    }

    def handler(self, task, context):
        self.log_start(task)
        input_data = task.get("inputData")
        n = input_data.get('N')
        ensemble = input_data.get('ensemble')
        scaling = input_data.get('scaling')
        lam = input_data.get('Lambda')
        src = None
        if ensemble == "source":
            src = source_from_inputs(input_data)
            if scaling == "gaussian" and lam is None:
                raise ConfigException("高斯区标度需要指定 Lambda", key="Lambda")
            if scaling == "gaussian":
                gaussian_regime_width(lam)
        elif input_data.get('eps') or lam is not None:
            logger.warning(f"系综 {ensemble} 不使用外源参数，eps / Lambda 被忽略")
        params = {"N": n, "ensemble": ensemble, "scaling": scaling, "Lambda": lam, "source": src}
        table = submit_streams(
            sample_rmt_edge, params, context["seed"], input_data.get('samples'),
            context["workers"], description=self.block_name,
        )
        name = rmt_reference(ensemble, scaling, lam if not input_data.get('eps') else None)
        edge = ensemble == "source" and scaling == "edge"
        summary = {
            "ensemble": ensemble,
            "scaling": scaling,
            "mean_lambda1": float(table["lambda1"].mean()),
            "mean_X": float(table["X"].mean()),
            "var_X": float(table["X"].var()),
        }
        reference = None
        if name is not None:
            reference = {"name": name, "column": "X", "edge": edge}
            if name == "FINITE":
                reference["eps"] = list(src.epsilons)
        if input_data.get('ks') and name is not None:
            support = (float(table["X"].min()), float(table["X"].max()))
            try:
                cdf = reference_cdf(
                    name, context["quad_order"], src=src, support=support, edge=edge
                )
            except DomainException as e:
                logger.warning(f"参考分布不可用，跳过 KS：{e.message}")
                summary["ks"] = None
            else:
                summary["ks"] = ks_against(table["X"].to_numpy(), cdf)
                logger.info(f"X 与 {name} 的 KS 距离：{summary['ks']:.4f}")
        elif name is None:
            logger.info("Λ > 1 时边缘标度没有极限分布，可改用 scaling=gaussian")
        return {"table": table, "summary": summary, "reference": reference}
