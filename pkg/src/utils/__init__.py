import hashlib
import json
from importlib import metadata

import numpy as np

from src.exceptions import ConfigException

TRACKED_PACKAGES = ["numpy", "scipy", "pandas"]


def generate_md5(string: str):
    return hashlib.md5(string.encode('utf-8')).hexdigest()


def config_fingerprint(echo: dict):
    return generate_md5(json.dumps(echo, sort_keys=True))


def stream_rng(seed, stream):
    """Generator for sample `stream` of master `seed`."""
    return np.random.default_rng([int(seed), int(stream)])


def parse_list(text):
    """
    Comma-separated reals, e.g. "0,0.7" -> [0.0, 0.7].
    """
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    try:
        return [float(v) for v in str(text).split(',') if v.strip() != '']
    except ValueError:
        raise ConfigException(f"无法解析为数字列表：{text}")


def parse_grid(text):
    """
    Inclusive grid "lo:hi:step"; -6:3:0.05 has 181 points.

    Returns:
    A numpy array of grid points.
    """
    if isinstance(text, np.ndarray):
        return text
    parts = str(text).split(':')
    if len(parts) == 1:
        return np.array(parse_list(text))
    if len(parts) != 3:
        raise ConfigException(f"网格格式应为 lo:hi:step：{text}")
    try:
        lo, hi, step = (float(p) for p in parts)
    except ValueError:
        raise ConfigException(f"网格格式应为 lo:hi:step：{text}")
    if step <= 0 or hi < lo:
        raise ConfigException(f"网格参数不合法：{text}")
    count = int(round((hi - lo) / step)) + 1
    return np.round(lo + step * np.arange(count), 12)


def package_versions():
    versions = {}
    for name in TRACKED_PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = None
    return versions


def chunk_list(input_list, chunk_size):
    """
    Chunk a list into smaller parts of specified size.

    Parameters:
    - input_list: The input list to be chunked.
    - chunk_size: The size of each chunk.

    Returns:
    A list of chunks.
    """
    return [
        input_list[i: i + chunk_size] for i in range(0, len(input_list), chunk_size)
    ]
