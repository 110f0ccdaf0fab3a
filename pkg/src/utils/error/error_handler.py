# src/utils/error/error_handler.py

import functools
import traceback
from enum import Enum
from typing import Optional, Callable
from datetime import datetime

from src.utils.logger.log_helper import error_logger


class ErrorCode(Enum):
    """错误码定义"""
    SUCCESS = (0, "成功")
    PARAM_ERROR = (1003, "参数错误")
    SYSTEM_ERROR = (1005, "系统错误")
    DOMAIN_ERROR = (3001, "点不在不变区间内")
    MESH_ERROR = (3002, "网格构造失败")
    CERTIFICATE_ERROR = (3003, "先验假设无法建立")
    CONVERGENCE_ERROR = (3004, "幂迭代未收敛")
    CONE_BOUNDS_ERROR = (3005, "锥序界为空")
    DIMENSION_RANGE_ERROR = (3006, "维数不在搜索区间内")
    BRACKET_ERROR = (3007, "无法建立维数包围区间")
    USAGE_ERROR = (64, "命令行用法错误")

    def __init__(self, code: int, message: str):
        self.code = code
        self.message = message


class BaseError(Exception):
    """基础异常类"""
    def __init__(self, error_code: ErrorCode, message: Optional[str] = None):
        self.error_code = error_code
        self.message = message or error_code.message
        super().__init__(self.message)

    def to_dict(self) -> dict:
        return {
            'code': self.error_code.code,
            'kind': self.error_code.name,
            'message': self.message,
        }


class InvalidArgumentError(BaseError):
    """参数错误: 空数字集、非正数字、r<2、h<=0 等"""
    def __init__(self, message: Optional[str] = None):
        super().__init__(ErrorCode.PARAM_ERROR, message)


class DomainError(BaseError):
    """定位点超出不变区间"""
    def __init__(self, message: Optional[str] = None):
        super().__init__(ErrorCode.DOMAIN_ERROR, message)


class MeshConstructionError(BaseError):
    """子区间/网格构造失败"""
    def __init__(self, message: Optional[str] = None):
        super().__init__(ErrorCode.MESH_ERROR, message)


class CertificateError(BaseError):
    """常数计算中出现非法量(如 1-G^2h^{2r+2}<=0)"""
    def __init__(self, message: Optional[str] = None):
        super().__init__(ErrorCode.CERTIFICATE_ERROR, message)


class ConvergenceError(BaseError):
    """幂迭代在最大步数内未满足停止准则"""
    def __init__(self, message: Optional[str] = None, iterations: int = 0,
                 spread: Optional[float] = None, lambda_est: Optional[float] = None):
        super().__init__(ErrorCode.CONVERGENCE_ERROR, message)
        self.iterations = iterations    # 已执行的迭代次数
        self.spread = spread            # 最后一次 max-min 比值差
        self.lambda_est = lambda_est    # 最后一次特征值估计


class ConeBoundsError(BaseError):
    """锥序比较的可行集为空"""
    def __init__(self, message: Optional[str] = None):
        super().__init__(ErrorCode.CONE_BOUNDS_ERROR, message)


class DimensionRangeError(BaseError):
    """phi(0) 与 phi(1.5) 不异号"""
    def __init__(self, message: Optional[str] = None):
        super().__init__(ErrorCode.DIMENSION_RANGE_ERROR, message)


class BracketError(BaseError):
    """认证包围区间扩张越出 (0, 1.5]"""
    def __init__(self, message: Optional[str] = None):
        super().__init__(ErrorCode.BRACKET_ERROR, message)


class UsageError(BaseError):
    """命令行参数或批处理文件格式错误"""
    def __init__(self, message: Optional[str] = None):
        super().__init__(ErrorCode.USAGE_ERROR, message)


def error_handler(error_types: Optional[dict] = None, logger=None):
    """
    全局错误处理装饰器
    Args:
        error_types: 错误类型处理映射, 处理函数签名为 handler(e, error_info)
        logger: 日志记录器
    """
    def decorator(func):
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            log = logger or error_logger
            func_name = func.__name__

            try:
                return func(*args, **kwargs)

            except Exception as e:
                tb = traceback.extract_tb(e.__traceback__)
                origin = tb[-1] if tb else None

                error_info = {
                    'function': func_name,
                    'error_type': type(e).__name__,
                    'error_msg': str(e),
                    'file': origin.filename if origin else '?',
                    'line': origin.lineno if origin else 0,
                    'time': datetime.now().strftime('%Y-%m-%d %H:%M:%S')
                }

                if error_types:
                    for err_type, handler in error_types.items():
                        if isinstance(e, err_type) and isinstance(handler, Callable):
                            return handler(e, error_info)

                log.error(
                    f"函数 {func_name} 执行错误\n"
                    f"位置: {error_info['file']}:{error_info['line']}\n"
                    f"类型: {error_info['error_type']}\n"
                    f"信息: {error_info['error_msg']}\n"
                    f"时间: {error_info['time']}"
                )
                raise

        return wrapper
    return decorator
