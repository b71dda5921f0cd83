from dotenv import load_dotenv

# 在最开始的时候加载 .env，不要挪到下面
load_dotenv()

import argparse
import json
import logging
import sys

from src.config import LAB_LOG_LEVEL, OUTPUT_FORMATS, build_config
from src.exceptions import LabException
from src.output import dump_metadata
from src.worker import WORKERS, run_experiment

logger = logging.getLogger("main")

# 这些类型的取值可能以 - 开头，例如 --s -6:3:0.05
SIGNED_TYPES = ("number", "integer", "list", "grid")


def add_block_arguments(parser, block_def):
    for spec in block_def["input"]:
        flag = "--" + spec["name"].replace("_", "-")
        help_text = spec.get("description") or spec.get("displayName")
        kwargs = {"dest": spec["name"], "default": None, "help": help_text}
        if spec["type"] == "boolean":
            # `--finite-n` 等价于 `--finite-n true`
            kwargs.update(nargs="?", const="true")
        elif spec["type"] == "options":
            kwargs["choices"] = [o["value"] for o in spec["options"]]
        parser.add_argument(flag, **kwargs)


def signed_flags():
    return {
        "--" + spec["name"].replace("_", "-")
        for worker in WORKERS.values()
        for spec in worker.block_def["input"]
        if spec["type"] in SIGNED_TYPES
    }


def attach_signed_values(argv, flags):
    """Rewrite `--flag value` as `--flag=value` so argparse keeps dash-leading values."""
    out = []
    i = 0
    while i < len(argv):
        token = argv[i]
        if token in flags and i + 1 < len(argv):
            out.append(f"{token}={argv[i + 1]}")
            i += 2
        else:
            out.append(token)
            i += 1
    return out


def build_parser():
    parser = argparse.ArgumentParser(
        prog="main.py",
        description="带外源的 PNG 生长模型与随机矩阵的数值实验",
    )
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--seed", type=int, default=None, help="主随机种子")
    shared.add_argument("--workers", type=int, default=None, help="并行进程数")
    shared.add_argument("--out", default=None, help="输出文件路径")
    shared.add_argument("--format", choices=OUTPUT_FORMATS, default=None, help="输出格式")
    shared.add_argument("--quad-order", dest="quad_order", type=int, default=None, help="Nyström 求积阶数")
    shared.add_argument("--config", default=None, help="key=value 配置文件")
    subparsers = parser.add_subparsers(dest="experiment", required=True)
    for name, worker in sorted(WORKERS.items()):
        sub = subparsers.add_parser(
            name, parents=[shared], help=worker.block_def.get("displayName"),
            description=worker.block_def.get("description"),
        )
        add_block_arguments(sub, worker.block_def)
    return parser


def main(argv=None):
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = vars(parser.parse_args(attach_signed_values(argv, signed_flags())))
    experiment = args.pop("experiment")
    config_path = args.pop("config")
    try:
        config = build_config(experiment, WORKERS[experiment].block_def, args, config_path)
        summary = run_experiment(config)
    except LabException as e:
        logger.error(f"{e.__class__.__name__}: {e.message}")
        print(json.dumps(e.to_dict(), ensure_ascii=False, default=str), file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logger.exception(e)
        return 1
    print(dump_metadata(summary))
    return 0


if __name__ == '__main__':
    logging.basicConfig(
        level=LAB_LOG_LEVEL,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    sys.exit(main())
