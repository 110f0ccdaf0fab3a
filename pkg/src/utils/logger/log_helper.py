from .log_manager import LogManager, LogMode
import os

# 从环境变量获取日志模式
LOG_MODE = os.getenv('LOG_MODE', 'console')
DEFAULT_MODE = {
    'console': LogMode.CONSOLE_ONLY,
    'file': LogMode.FILE_ONLY,
    'both': LogMode.CONSOLE_AND_FILE,
    'off': LogMode.SILENT,
}.get(LOG_MODE, LogMode.CONSOLE_ONLY)


def get_logger(name: str, mode: LogMode = None):
    """获取日志记录器"""
    mode = mode or DEFAULT_MODE
    return LogManager.get_instance().get_logger(name, mode=mode)


def set_log_mode(mode: LogMode):
    """切换所有模块记录器的输出模式(CLI 的 --quiet / --log-file)"""
    LogManager.get_instance().set_mode_all(mode)


# 创建不同模块的记录器
ifs_logger = get_logger('ifs')                # 迭代函数系统与连分数
mesh_logger = get_logger('mesh')              # 不变区间与配置网格
cert_logger = get_logger('certificate')       # 先验常数与假设证书
transfer_logger = get_logger('transfer')      # 转移矩阵与幂迭代
solver_logger = get_logger('solver')          # 维数求根与区间认证
cli_logger = get_logger('cli')                # 命令行与报告
error_logger = get_logger("error")
