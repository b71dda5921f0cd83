"""
Data files: CSV with a single '#'-prefixed JSON metadata line, or a JSON
mirror holding the same metadata and rows.
"""
import json
import logging
import os

import numpy as np
import pandas as pd

from src.exceptions import ConfigException

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


def _builtin(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"无法序列化为 JSON：{type(value)}")


def dump_metadata(metadata):
    return json.dumps(metadata, sort_keys=True, ensure_ascii=False, default=_builtin)


def write_table(df: pd.DataFrame, metadata: dict, path, fmt="csv"):
    folder = os.path.dirname(path)
    if folder:
        os.makedirs(folder, exist_ok=True)
    if fmt == "json":
        payload = {
            "metadata": metadata,
            "columns": list(df.columns),
            "rows": json.loads(df.to_json(orient="values", double_precision=15)),
        }
        with open(path, "w", encoding="utf-8") as f:
            json.dump(payload, f, sort_keys=True, ensure_ascii=False, default=_builtin)
    else:
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write("# " + dump_metadata(metadata) + "\n")
            df.to_csv(f, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info(f"写入数据文件：{path}（{len(df)} 行）")
    return path


def read_table(path):
    """
    Returns:
    (DataFrame, metadata dict) for either format.
    """
    if not os.path.exists(path):
        raise ConfigException(f"数据文件不存在：{path}")
    if path.endswith(".json"):
        with open(path, encoding="utf-8") as f:
            payload = json.load(f)
        return pd.DataFrame(payload["rows"], columns=payload["columns"]), payload["metadata"]
    with open(path, encoding="utf-8") as f:
        first = f.readline()
    if not first.startswith("# "):
        raise ConfigException(f"数据文件缺少元数据行：{path}")
    try:
        metadata = json.loads(first[2:])
    except json.JSONDecodeError as e:
        raise ConfigException(f"元数据行不是合法 JSON：{e}")
    return pd.read_csv(path, comment="#"), metadata
