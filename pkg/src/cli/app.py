# src/cli/app.py

import argparse
import os
import sys
from typing import List, Optional

from src.cli.batch import batch_table
from src.cli.config import DEFAULT_PRECISION, RunConfig, load_batch_file
from src.cli.pipeline import report_name, run
from src.database.json_db import JsonDB
from src.domain.mesh import DEFAULT_MU_CAP
from src.utils.error.error_handler import BaseError, ErrorCode, UsageError, error_handler
from src.utils.logger.log_helper import cli_logger, set_log_mode
from src.utils.logger.log_manager import LogMode

EXIT_ERROR = 1
EXIT_USAGE = ErrorCode.USAGE_ERROR.code


class _ArgumentParser(argparse.ArgumentParser):
    """参数错误改为抛出 UsageError, 由统一的错误处理返回退出码"""

    def error(self, message):
        raise UsageError(f"{message}\n{self.format_usage().strip()}")


def build_parser() -> argparse.ArgumentParser:
    p = _ArgumentParser(
        prog="cf-dimension",
        description="连分数 IFS 极限集 Hausdorff 维数的严格包围区间",
    )
    p.add_argument("--set", type=str, help="数字集合 ℬ, 逗号分隔, 例如 1,2 或 1,4,7")
    p.add_argument("--degree", type=int, default=8, help="分片多项式次数 r (默认 8)")
    p.add_argument("--h", type=str, default="0.01", help="目标网格步长 (默认 0.01)")
    p.add_argument("--nu", type=str, default="1", help="迭代阶数 ν, 或 auto (默认 1)")
    p.add_argument("--nu-prime", type=int, default=0, dest="nu_prime",
                   help="子区域构造的迭代深度 ν′ (默认 0)")
    p.add_argument("--digits", type=int, default=DEFAULT_PRECISION,
                   help=f"工作精度, 十进制位数 (默认 {DEFAULT_PRECISION}, 至少 17)")
    p.add_argument("--tol", type=str, default=None, help="求根容差 (默认按预测宽度自动选择)")
    p.add_argument("--mu-cap", type=str, default=str(DEFAULT_MU_CAP), dest="mu_cap",
                   help="合并子区间时允许的步长比上限 (默认 4)")
    p.add_argument("--no-verify", action="store_true", dest="no_verify",
                   help="跳过证书, 取 H = 0, 结果标记为未认证")
    p.add_argument("--json", action="store_true", help="输出 JSON 报告")
    p.add_argument("--batch", type=str, default=None, help="TOML 批处理文件")
    p.add_argument("--jobs", type=int, default=1, help="批处理并行行数 (默认 1)")
    p.add_argument("--save-dir", type=str, default=None, dest="save_dir",
                   help="把机器可读报告保存到该目录")
    p.add_argument("--dump-matrix", type=str, default=None, dest="dump_matrix",
                   help="导出 s_mid 处的配置矩阵 (.bin 为二进制, 其余为文本)")
    p.add_argument("--quiet", action="store_true", help="关闭日志")
    p.add_argument("--log-file", action="store_true", dest="log_file",
                   help="日志同时写入 logs/ 目录")
    p.add_argument("--timings", action="store_true", help="报告中包含各阶段耗时")
    return p


def _configure_logging(args: argparse.Namespace):
    if args.quiet:
        set_log_mode(LogMode.SILENT)
    elif args.log_file:
        set_log_mode(LogMode.CONSOLE_AND_FILE)


def _usage_failure(e: UsageError, error_info: dict) -> int:
    print(f"用法错误: {e.message}", file=sys.stderr)
    return EXIT_USAGE


def _run_failure(e: BaseError, error_info: dict) -> int:
    cli_logger.error(f"{error_info['function']} 失败 [{e.error_code.code}] {e.message} "
                     f"({os.path.basename(error_info['file'])}:{error_info['line']})")
    print(f"错误: {e.message}", file=sys.stderr)
    return EXIT_ERROR


@error_handler(error_types={UsageError: _usage_failure, BaseError: _run_failure})
def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args)

    if args.batch:
        rows, _ = load_batch_file(args.batch)
        for row in rows:
            row.output_format = 'json' if args.json else 'text'
        table = batch_table(rows, jobs=args.jobs)
        print(table.render(args.json))
        if args.save_dir:
            stem = os.path.splitext(os.path.basename(args.batch))[0]
            table.save(JsonDB(args.save_dir), f"batch_{stem}")
        return table.exit_code

    if not args.set:
        raise UsageError("需要 --set 或 --batch")
    config = RunConfig.from_args(args).validate()
    report = run(config)
    print(report.render())
    if args.save_dir:
        JsonDB(args.save_dir).save_report(report_name(config), report.to_dict())
    return report.exit_code
