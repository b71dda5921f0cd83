"""
Process-level settings from the environment (after load_dotenv in main.py)
and per-experiment input validation driven by each block's block_def.
"""
import os
from dataclasses import dataclass, field
from typing import Any, Dict

from dotenv import dotenv_values

from src.exceptions import ConfigException
from src.utils import parse_grid, parse_list


def _env_int(name, default, minimum):
    value = os.environ.get(name, default)
    try:
        number = int(value)
    except (TypeError, ValueError):
        raise ConfigException(f"请在环境变量中正确配置 {name}（整数），当前值：{value}", key=name)
    if number < minimum:
        raise ConfigException(f"请在环境变量中正确配置 {name}（>= {minimum}），当前值：{value}", key=name)
    return number


LAB_OUTPUT_DIR = os.environ.get("LAB_OUTPUT_DIR", "./output")
LAB_LOG_LEVEL = os.environ.get("LAB_LOG_LEVEL", "INFO").upper()

DEFAULT_WORKERS = 1
DEFAULT_QUAD_ORDER = 48
DEFAULT_SEED = 0
DEFAULT_CHUNK_SIZE = 256


@dataclass(frozen=True)
class LabEnvironment:
    workers: int
    quad_order: int
    seed: int
    chunk_size: int


def lab_environment():
    """Integer LAB_* settings, read and checked on every call."""
    return LabEnvironment(
        workers=_env_int("LAB_WORKERS", DEFAULT_WORKERS, 1),
        quad_order=_env_int("LAB_QUAD_ORDER", DEFAULT_QUAD_ORDER, 8),
        seed=_env_int("LAB_SEED", DEFAULT_SEED, 0),
        chunk_size=_env_int("LAB_CHUNK_SIZE", DEFAULT_CHUNK_SIZE, 1),
    )


OUTPUT_FORMATS = ("csv", "json")

SHARED_KEYS = {"seed", "workers", "out", "format", "quad_order"}

TRUE_VALUES = ("1", "true", "yes", "on")
FALSE_VALUES = ("0", "false", "no", "off")


def load_config_file(path):
    """Flat key=value file; keys are experiment input names."""
    if not os.path.exists(path):
        raise ConfigException(f"配置文件不存在：{path}")
    return {k: v for k, v in dotenv_values(path).items() if v is not None}


def coerce_value(spec, raw):
    name = spec["name"]
    kind = spec.get("type", "string")
    if raw is None:
        return None
    try:
        if kind == "number":
            value = float(raw)
        elif kind == "integer":
            value = int(float(raw))
            if value != float(raw):
                raise ValueError(raw)
        elif kind == "boolean":
            if isinstance(raw, bool):
                value = raw
            elif str(raw).lower() in TRUE_VALUES:
                value = True
            elif str(raw).lower() in FALSE_VALUES:
                value = False
            else:
                raise ValueError(raw)
        elif kind == "list":
            value = parse_list(raw)
        elif kind == "grid":
            value = [float(v) for v in parse_grid(raw)]
        elif kind == "options":
            value = str(raw)
            choices = [o["value"] for o in spec["options"]]
            if value not in choices:
                raise ConfigException(f"参数 {name} 只能取 {choices}，当前值：{value}", key=name)
        else:
            value = str(raw)
    except (TypeError, ValueError):
        raise ConfigException(f"参数 {name} 的类型应为 {kind}，当前值：{raw}", key=name)
    if kind not in ("number", "integer"):
        return value
    limits = spec.get("typeOptions", {})
    if "minValue" in limits and value < limits["minValue"]:
        raise ConfigException(f"参数 {name} 不能小于 {limits['minValue']}：{value}", key=name)
    if "maxValue" in limits and value > limits["maxValue"]:
        raise ConfigException(f"参数 {name} 不能大于 {limits['maxValue']}：{value}", key=name)
    return value


def resolve_inputs(block_def, cli_values, file_values=None):
    """
    Merge CLI values over config-file values over block defaults and
    validate each against its declaration.
    """
    file_values = file_values or {}
    known = {spec["name"] for spec in block_def["input"]}
    unknown = set(file_values) - known - SHARED_KEYS
    if unknown:
        raise ConfigException(f"配置文件中存在未知参数：{sorted(unknown)}")
    resolved = {}
    for spec in block_def["input"]:
        name = spec["name"]
        raw = cli_values.get(name)
        if raw is None:
            raw = file_values.get(name)
        if raw is None:
            raw = spec.get("default")
        value = coerce_value(spec, raw)
        if value is None and spec.get("required"):
            raise ConfigException(f"缺少必填参数：{name}", key=name)
        resolved[name] = value
    return resolved


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    parameters: Dict[str, Any] = field(default_factory=dict)
    seed: int = DEFAULT_SEED
    workers: int = DEFAULT_WORKERS
    out: str = None
    format: str = "csv"
    quad_order: int = DEFAULT_QUAD_ORDER

    def __post_init__(self):
        if self.format not in OUTPUT_FORMATS:
            raise ConfigException(f"输出格式只能是 {OUTPUT_FORMATS}：{self.format}")
        if int(self.workers) < 1:
            raise ConfigException(f"workers 必须 >= 1：{self.workers}")
        if int(self.quad_order) < 8:
            raise ConfigException(f"quad_order 必须 >= 8：{self.quad_order}")
        if int(self.seed) < 0:
            raise ConfigException(f"seed 必须是非负整数：{self.seed}")

    @property
    def output_path(self):
        if self.out:
            return self.out
        return os.path.join(LAB_OUTPUT_DIR, f"{self.experiment}-{self.seed}.{self.format}")

    def echo(self):
        """Everything that determines the data, nothing that doesn't."""
        return {
            "experiment": self.experiment,
            "parameters": dict(self.parameters),
            "seed": int(self.seed),
            "quad_order": int(self.quad_order),
            "format": self.format,
        }


def build_config(experiment, block_def, cli_values, config_path=None):
    env = lab_environment()
    file_values = load_config_file(config_path) if config_path else {}
    shared = {}
    for key, cast, default in (
        ("seed", int, env.seed),
        ("workers", int, env.workers),
        ("quad_order", int, env.quad_order),
        ("out", str, None),
        ("format", str, "csv"),
    ):
        raw = cli_values.get(key)
        if raw is None:
            raw = file_values.get(key, default)
        try:
            shared[key] = cast(raw) if raw is not None else None
        except ValueError:
            raise ConfigException(f"参数 {key} 的值不合法：{raw}", key=key)
    parameters = resolve_inputs(block_def, cli_values, file_values)
    return ExperimentConfig(experiment=experiment, parameters=parameters, **shared)
