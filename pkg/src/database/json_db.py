# src/database/json_db.py

import os
import re
from typing import Optional

from src.utils.common.common import load_json, save_json
from src.utils.logger.log_helper import cli_logger


class JsonDB:
    """使用JSON文件保存运行报告与批处理结果"""

    def __init__(self, data_dir: str):
        """
        初始化JSON数据库

        Args:
            data_dir: 数据存储目录
        """
        self.data_dir = data_dir
        os.makedirs(data_dir, exist_ok=True)

    def report_path(self, name: str) -> str:
        safe = re.sub(r'[^0-9A-Za-z_.\-]+', '_', name).strip('_') or 'report'
        return os.path.join(self.data_dir, f'{safe}.json')

    def save_report(self, name: str, data: dict) -> bool:
        """
        保存一份机器可读报告

        Args:
            name: 报告名, 例如 'E_1_2' 或 'batch_table1'
            data: 报告字典, 按插入顺序写出
        """
        filename = self.report_path(name)
        try:
            save_json(data, filename)
        except OSError as e:
            cli_logger.error(f"保存报告失败 {filename}: {e}")
            return False
        cli_logger.info(f"报告已保存到 {filename}")
        return True

    def load_report(self, name: str) -> Optional[dict]:
        """
        加载报告

        Returns:
            报告字典, 文件不存在时返回 None
        """
        filename = self.report_path(name)
        if not os.path.exists(filename):
            cli_logger.warning(f"报告文件不存在: {filename}")
            return None
        return load_json(filename)
