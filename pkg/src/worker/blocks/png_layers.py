import logging

import pandas as pd

from src.png import PngParams, layer_summary, run_multilayer
from src.queue import submit_streams
from src.worker.blocks import Worker, number_input, output_spec

logger = logging.getLogger(__name__)


def sample_png_layers(params, seed, streams):
    png = PngParams(q=params['q'], alpha=params['alpha'], n=params['N'])
    rows = []
    for stream in streams:
        field = run_multilayer(png, seed, params['depth'], stream=stream)
        for row in layer_summary(field):
            rows.append({"sample": stream, **row})
    return pd.DataFrame(rows, columns=["sample", "layer", "h_origin", "width"])


class PngLayersWorker(Worker):
    block_name = 'png-layers'
    block_def = {
        "type": "SIMPLE",
        "name": block_name,
        "displayName": 'PNG 多层线系综',
        "description": '演化多层 PNG（非相交游走），输出每层在原点的高度与支撑宽度',
        "input": [
            number_input('q', 'bulk 成核参数 q', 0.25, True, minValue=0.0, maxValue=1.0),
            number_input('alpha', '外源强度 α', 1.0, True),
            {
                "displayName": 'N（终止时间 t = 2N）',
                "name": 'N',
                "type": 'integer',
                "default": 32,
                "required": True,
                "typeOptions": {"minValue": 1},
            },
            {
                "displayName": '样本数',
                "name": 'samples',
                "type": 'integer',
                "default": 100,
                "required": True,
                "typeOptions": {"minValue": 1},
            },
            {
                "displayName": '层数',
                "name": 'depth',
                "type": 'integer',
                "default": 10,
                "required": True,
                "typeOptions": {"minValue": 1},
            },
        ],
        "output": output_spec('各层高度样本', [
            ("depth", "层数", "number"),
            ("mean_occupied_layers", "平均占据层数", "number"),
            ("max_occupied_layers", "最大占据层数", "number"),
            ("mean_h0", "顶层原点高度均值", "number"),
        ]),
    }

    def handler(self, task, context):
        self.log_start(task)
        input_data = task.get("inputData")
        params = {
            "q": input_data.get('q'),
            "alpha": input_data.get('alpha'),
            "N": input_data.get('N'),
            "depth": input_data.get('depth'),
        }
        # 先校验参数，避免在子进程里才报错
        PngParams(q=params['q'], alpha=params['alpha'], n=params['N'])
        table = submit_streams(
            sample_png_layers, params, context["seed"], input_data.get('samples'),
            context["workers"], description=self.block_name,
        )
        occupied = table[table["width"] > 0].groupby("sample").size()
        occupied = occupied.reindex(range(input_data.get('samples')), fill_value=0)
        top = table[table["layer"] == 0]
        summary = {
            "depth": params["depth"],
            "mean_occupied_layers": float(occupied.mean()),
            "max_occupied_layers": int(occupied.max()),
            "mean_h0": float(top["h_origin"].mean()),
        }
        if summary["max_occupied_layers"] == params["depth"]:
            logger.warning(f"最底层已被占用，depth={params['depth']} 可能不足")
        return {"table": table, "summary": summary, "reference": None}
