# src/cli/batch.py

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional

import pandas as pd

from src.cli.config import RunConfig
from src.cli.pipeline import run
from src.cli.report import EXIT_UNVERIFIED, EXIT_VERIFIED, RunReport
from src.database.json_db import JsonDB
from src.utils.common.tools import matching_decimal_places
from src.utils.error.error_handler import BaseError, UsageError
from src.utils.logger.log_helper import cli_logger

TABLE_COLUMNS = ['set', 'r', 'h', 'nu', 's', 'digits', 'verified', 'expected', 'agree', 'status']


@dataclass
class RowOutcome:
    """批处理中一行的结果; 出错时 report 为 None"""
    config: RunConfig
    report: Optional[RunReport] = None
    error: Optional[str] = None

    def to_row(self) -> dict:
        cfg = self.config
        row = {
            'set': cfg.name,
            'r': cfg.r,
            'h': cfg.h_target,
            'nu': cfg.nu,
            's': None,
            'digits': None,
            'verified': False,
            'expected': cfg.expected,
            'agree': None,
            'status': 'error',
        }
        if self.report is None:
            return row
        value = str(self.report.reported_value())
        row.update({
            'nu': self.report.nu,
            's': value,
            'digits': self.report.reported_digits(),
            'verified': self.report.verified,
            'status': 'verified' if self.report.verified else 'unverified',
        })
        if cfg.expected is not None:
            row['agree'] = matching_decimal_places(self.report.arith.to_str(self.report.bracket.s_mid),
                                                   cfg.expected)
        return row

    def to_dict(self) -> dict:
        data = {'row': self.to_row()}
        if self.report is not None:
            data['report'] = self.report.to_dict()
        if self.error is not None:
            data['error'] = self.error
        return data


class TableReport:
    """批处理结果表"""

    def __init__(self, outcomes: List[RowOutcome]):
        self.outcomes = outcomes
        self.frame = pd.DataFrame([o.to_row() for o in outcomes], columns=TABLE_COLUMNS)

    @property
    def exit_code(self) -> int:
        if any(o.report is None for o in self.outcomes):
            return 1
        if all(o.report.verified for o in self.outcomes):
            return EXIT_VERIFIED
        return EXIT_UNVERIFIED

    def to_dict(self) -> dict:
        return {'rows': [o.to_dict() for o in self.outcomes]}

    def render(self, as_json: bool = False) -> str:
        if as_json:
            return json.dumps(self.to_dict(), ensure_ascii=False, indent=2)
        lines = [self.frame.to_string(index=False)]
        for o in self.outcomes:
            if o.error is not None:
                lines.append(f"! {o.config.name}: {o.error}")
            elif not o.report.verified:
                lines.append(f"! {o.config.name}: 未认证 ({'; '.join(o.report.reasons)})")
        return "\n".join(lines)

    def save(self, db: JsonDB, name: str) -> bool:
        """JSON 旁路文件加同名 CSV"""
        self.frame.to_csv(os.path.join(db.data_dir, f"{name}.csv"), index=False)
        return db.save_report(name, self.to_dict())


def _run_row(config: RunConfig) -> RowOutcome:
    try:
        return RowOutcome(config=config, report=run(config))
    except BaseError as e:
        cli_logger.error(f"{config.name} 失败 [{e.error_code.code}]: {e.message}")
        return RowOutcome(config=config, error=f"{type(e).__name__}: {e.message}")
    except Exception as e:
        cli_logger.error(f"{config.name} 意外失败: {type(e).__name__}", exc_info=e)
        return RowOutcome(config=config, error=f"{type(e).__name__}: {e}")


def batch_table(rows: List[RunConfig], jobs: int = 1) -> TableReport:
    """逐行运行; 单行出错只记录在该行, 不中断整张表"""
    if not rows:
        raise UsageError("批处理至少需要一行配置")
    if jobs < 1:
        raise UsageError(f"--jobs 必须 >= 1, 收到 {jobs}")
    cli_logger.info(f"批处理 {len(rows)} 行, 并行 {jobs}")
    if jobs == 1:
        outcomes = [_run_row(row) for row in rows]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_row, rows))
    done = sum(o.report is not None for o in outcomes)
    cli_logger.info(f"批处理完成: {done}/{len(rows)} 行成功")
    return TableReport(outcomes)
