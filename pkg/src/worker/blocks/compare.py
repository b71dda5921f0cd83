import logging

import numpy as np
import pandas as pd

from src.exceptions import ConfigException
from src.kernels import SourceSpec
from src.output import read_table
from src.stats import sup_difference, two_sample_ks
from src.worker.blocks import (
    REFERENCES,
    Worker,
    ks_against,
    number_input,
    options_input,
    output_spec,
    reference_cdf,
)

logger = logging.getLogger(__name__)

AGAINST = ("auto", *REFERENCES, "JOINT", "SAMPLES")


def _columns(text):
    return [c.strip() for c in str(text).split(',') if c.strip()]


def joint_samples(df, reference, column):
    columns = _columns(column) if column else (reference or {}).get("columns")
    if not columns:
        raise ConfigException("JOINT 比较需要 --column 或带 columns 的元数据", key="column")
    missing = [c for c in columns if c not in df.columns]
    if missing:
        raise ConfigException(f"数据文件中缺少列：{missing}", key="column")
    return df[columns].to_numpy(dtype=float), columns


def joint_table(reference_file, m):
    table, meta = read_table(reference_file)
    names = [f"s_{j}" for j in range(m)]
    if any(c not in table.columns for c in names + ["value"]):
        raise ConfigException(f"参考文件不是 {m} 个时间的 dist-joint 输出：{reference_file}")
    return table[names].to_numpy(dtype=float), table["value"].to_numpy(dtype=float), meta


class CompareWorker(Worker):
    block_name = 'compare'
    block_def = {
        "type": "SIMPLE",
        "name": block_name,
        "displayName": '样本与参考分布比较',
        "description": '读取采样实验的数据文件，计算与参考分布的 KS 距离或联合 CDF 的最大偏差',
        "input": [
            {
                "displayName": '样本数据文件',
                "name": 'input',
                "type": 'string',
                "default": None,
                "required": True,
            },
            options_input(
                'against', '参考分布', AGAINST, 'auto',
                'auto 使用样本文件元数据中记录的参考分布；SAMPLES 为两样本 KS',
            ),
            {
                "displayName": '样本列（JOINT 时逗号分隔多列）',
                "name": 'column',
                "type": 'string',
                "default": None,
                "required": False,
            },
            {
                "displayName": '参考数据文件（JOINT 为 dist-joint 输出，SAMPLES 为另一份样本）',
                "name": 'reference_file',
                "type": 'string',
                "default": None,
                "required": False,
            },
            number_input('omega', '过渡参数 ω', None, False),
            number_input('tau', '位置 τ', None, False),
        ],
        "output": output_spec('比较结果', [
            ("metric", "距离类型", "string"),
            ("value", "距离", "number"),
            ("n", "样本数", "number"),
            ("against", "参考", "string"),
            ("column", "比较的列", "string"),
        ]),
    }

    def handler(self, task, context):
        self.log_start(task)
        input_data = task.get("inputData")
        df, meta = read_table(input_data.get('input'))
        reference = meta.get("reference") or {}
        against = input_data.get('against')
        if against == "auto":
            against = reference.get("name")
            if against is None:
                raise ConfigException("样本文件没有记录参考分布，请指定 --against", key="against")
        column = input_data.get('column')
        reference_file = input_data.get('reference_file')

        if against == "JOINT":
            if not reference_file:
                raise ConfigException("JOINT 比较需要 --reference-file", key="reference_file")
            samples, columns = joint_samples(df, reference, column)
            thresholds, values, ref_meta = joint_table(reference_file, samples.shape[1])
            ref_times = (ref_meta.get("reference") or {}).get("times")
            if reference.get("times") and ref_times and list(ref_times) != list(reference["times"]):
                logger.warning(f"时间点不一致：样本 {reference['times']}，参考 {ref_times}")
            metric, value = "sup_difference", sup_difference(samples, thresholds, values)
            column = ",".join(columns)
            n = len(samples)
        else:
            column = column or reference.get("column")
            if column not in df.columns:
                raise ConfigException(f"数据文件中缺少列：{column}", key="column")
            samples = df[column].to_numpy(dtype=float)
            n = len(samples)
            if against == "SAMPLES":
                if not reference_file:
                    raise ConfigException("SAMPLES 比较需要 --reference-file", key="reference_file")
                other, _ = read_table(reference_file)
                if column not in other.columns:
                    raise ConfigException(f"参考文件中缺少列：{column}", key="column")
                value, pvalue = two_sample_ks(samples, other[column].to_numpy(dtype=float))
                metric = "ks_two_sample"
                logger.info(f"两样本 KS p 值：{pvalue:.4g}")
            else:
                omega = input_data.get('omega')
                tau = input_data.get('tau')
                src = None
                if against == "FINITE":
                    if "eps" not in reference:
                        raise ConfigException("FINITE 比较需要样本元数据中的 eps", key="against")
                    src = SourceSpec.from_list(reference["eps"])
                cdf = reference_cdf(
                    against, context["quad_order"],
                    omega=omega if omega is not None else (reference.get("omega") or 0.0),
                    tau=tau if tau is not None else (reference.get("tau") or 0.0),
                    src=src,
                    support=(float(np.min(samples)), float(np.max(samples))),
                    edge=bool(reference.get("edge")),
                )
                metric, value = "ks", ks_against(samples, cdf)
        logger.info(f"{column} 与 {against} 的 {metric}：{value:.4f}（n={n}）")
        table = pd.DataFrame([{
            "metric": metric,
            "value": value,
            "n": n,
            "against": against,
            "column": column,
        }])
        summary = {"metric": metric, "value": value, "n": n, "against": against, "column": column}
        return {"table": table, "summary": summary, "reference": None}
