# src/utils/common/common.py

import json
import os
from typing import Optional

from src.utils.logger.log_helper import cli_logger


def save_json(data: dict, file_path: str):
    """保存JSON数据, 键按插入顺序写出"""
    directory = os.path.dirname(file_path)
    if directory and not os.path.exists(directory):
        os.makedirs(directory)

    with open(file_path, 'w', encoding='utf-8') as f:
        json.dump(data, f, ensure_ascii=False, indent=2)
        f.write('\n')


def load_json(file_path: str) -> Optional[dict]:
    """加载JSON数据, 文件不存在或格式错误时返回 None"""
    try:
        if os.path.exists(file_path):
            with open(file_path, 'r', encoding='utf-8') as f:
                return json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        cli_logger.error(f"加载JSON文件失败: {str(e)}")
    return None
