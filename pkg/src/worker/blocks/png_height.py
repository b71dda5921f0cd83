import logging

import numpy as np
import pandas as pd

from src.exceptions import ConfigException, DomainException
from src.png import PngParams, alpha_from_omega, scale_height_gaussian, simulate_heights
from src.queue import submit_streams
from src.worker.blocks import Worker, ks_against, number_input, output_spec, reference_cdf

logger = logging.getLogger(__name__)


def sample_png_heights(params, seed, streams):
    png = PngParams(q=params['q'], alpha=params['alpha'], n=params['N'])
    h0, scaled = simulate_heights(png, seed, streams, params['taus'])
    data = {"sample": streams, "h0": h0}
    for k in range(scaled.shape[1]):
        data[f"H_{k}"] = scaled[:, k]
    if png.alpha > 1:
        data["HG"] = scale_height_gaussian(h0, png)
    return pd.DataFrame(data)


def png_reference(alpha, omega, tau=0.0):
    if omega is not None or (alpha == 1 and tau != 0):
        return "TRANSITION"
    if alpha < 1:
        return "F2"
    if alpha == 1:
        return "GOE2"
    return "GAUSS"


class PngHeightWorker(Worker):
    block_name = 'png-height'
    block_def = {
        "type": "SIMPLE",
        "name": block_name,
        "displayName": 'PNG 液滴高度采样',
        "description": '模拟带边界外源的离散 PNG 液滴，输出 t=2N 时的原点高度及标度高度',
        "input": [
            number_input('q', 'bulk 成核参数 q', 0.25, True, minValue=0.0, maxValue=1.0),
            number_input('alpha', '外源强度 α', None, False, '与 omega 二选一，均不填时为 1'),
            number_input('omega', '临界窗口参数 ω', None, False, 'α = 1 - ω/(dN^{1/3})'),
            {
                "displayName": 'N（终止时间 t = 2N）',
                "name": 'N',
                "type": 'integer',
                "default": 64,
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
            {
                "displayName": '标度位置 τ（逗号分隔）',
                "name": 'taus',
                "type": 'list',
                "default": '0',
                "required": True,
            },
            {
                "displayName": '计算 KS 距离',
                "name": 'ks',
                "type": 'boolean',
                "default": True,
                "required": False,
            },
        ],
        "output": output_spec('PNG 原点高度样本', [
            ("alpha", "边界参数 α", "number"),
            ("a", "标度常数 a", "number"),
            ("d", "标度常数 d", "number"),
            ("c", "标度常数 c", "number"),
            ("mean_h0", "原点高度均值", "number"),
            ("mean_scaled", "标度高度均值", "number"),
        ]),
    }

    def handler(self, task, context):
        self.log_start(task)
        input_data = task.get("inputData")
        q = input_data.get('q')
        n = input_data.get('N')
        alpha = input_data.get('alpha')
        omega = input_data.get('omega')
        taus = input_data.get('taus') or [0.0]
        if alpha is not None and omega is not None:
            raise ConfigException("alpha 与 omega 只能指定一个")
        if omega is not None:
            alpha = alpha_from_omega(omega, q, n)
        elif alpha is None:
            alpha = 1.0
        png = PngParams(q=q, alpha=alpha, n=n)
        params = {"q": q, "alpha": alpha, "N": n, "taus": taus}
        table = submit_streams(
            sample_png_heights, params, context["seed"], input_data.get('samples'),
            context["workers"], description=self.block_name,
        )
        name = png_reference(alpha, omega, taus[0])
        column = "HG" if name == "GAUSS" else "H_0"
        const = png.constants()
        summary = {
            "alpha": alpha,
            "a": const.a,
            "d": const.d,
            "c": const.c,
            "mean_h0": float(np.mean(table["h0"])),
            "mean_scaled": float(np.mean(table[column])),
        }
        reference = {"name": name, "column": column, "omega": omega, "tau": taus[0]}
        if input_data.get('ks'):
            try:
                cdf = reference_cdf(name, context["quad_order"], omega=omega or 0.0, tau=taus[0])
            except DomainException as e:
                logger.warning(f"参考分布不可用，跳过 KS：{e.message}")
                summary["ks"] = None
            else:
                summary["ks"] = ks_against(table[column].to_numpy(), cdf)
                logger.info(f"{column} 与 {name} 的 KS 距离：{summary['ks']:.4f}")
        return {"table": table, "summary": summary, "reference": reference}
