# src/cli/config.py

import argparse
import os
from dataclasses import asdict, dataclass
from typing import List, Optional, Tuple, Union

import toml

from src.ifs.ifs_core import GaussIFS, parse_digit
from src.utils.error.error_handler import InvalidArgumentError, UsageError

# RunConfig 的最低工作精度 (低于此值走 float64, 只供库内部与测试使用)
MIN_PRECISION = 17
DEFAULT_PRECISION = 34
OUTPUT_FORMATS = ('text', 'json')

# 批处理文件中的键 -> RunConfig 字段
_BATCH_KEYS = {
    'set': 'digits',
    'degree': 'r',
    'h': 'h_target',
    'nu': 'nu',
    'nu_prime': 'nu_prime',
    'digits': 'precision',
    'tol': 'tol',
    'mu_cap': 'mu_cap',
    'verify': 'verify',
    'label': 'label',
    'expected': 'expected',
}
_REQUIRED_BATCH_KEYS = ('set', 'degree', 'h', 'nu')


@dataclass
class RunConfig:
    """一次维数计算的全部参数, 实数以字符串保存以便原样回显"""
    digits: List[str]                       # ℬ, 例如 ['1', '2']
    r: int                                  # 分片多项式次数
    h_target: str                           # 目标网格步长
    nu: Union[int, str]                     # 迭代阶数, 'auto' 表示取最小可认证的 ν
    nu_prime: int = 0                       # 子区域构造的迭代深度
    precision: int = DEFAULT_PRECISION      # 十进制有效位数
    verify: bool = True                     # False 时 H = 0, 结果为启发式
    tol: Optional[str] = None               # 求根容差, None 为自动
    mu_cap: str = '4'                       # 合并子区间时允许的步长比
    output_format: str = 'text'
    label: Optional[str] = None             # 批处理表格中的行名
    expected: Optional[str] = None          # 已知参考值, 仅用于比对
    dump_matrix: Optional[str] = None       # 导出 s_mid 处的矩阵
    timings: bool = False                   # 报告中是否包含耗时

    def validate(self) -> 'RunConfig':
        """检查参数约束, 违反时抛出 UsageError"""
        if not self.digits:
            raise UsageError("--set 不能为空, 例如 --set 1,2")
        try:
            self.ifs()
        except InvalidArgumentError as e:
            raise UsageError(f"--set 非法: {e.message}")
        if not isinstance(self.r, int) or self.r < 2:
            raise UsageError(f"--degree 必须是 >= 2 的整数, 收到 {self.r!r}")
        if _positive(self.h_target) is None:
            raise UsageError(f"--h 必须是正数, 收到 {self.h_target!r}")
        if self.nu != 'auto' and (not isinstance(self.nu, int) or self.nu < 1):
            raise UsageError(f"--nu 必须是 >= 1 的整数或 auto, 收到 {self.nu!r}")
        if not isinstance(self.nu_prime, int) or self.nu_prime < 0:
            raise UsageError(f"--nu-prime 必须是 >= 0 的整数, 收到 {self.nu_prime!r}")
        if isinstance(self.nu, int) and self.nu_prime > self.nu:
            raise UsageError(f"--nu-prime ({self.nu_prime}) 不能大于 --nu ({self.nu})")
        if not isinstance(self.precision, int) or self.precision < MIN_PRECISION:
            raise UsageError(f"--digits 必须 >= {MIN_PRECISION}, 收到 {self.precision!r}")
        if self.tol is not None and _positive(self.tol) is None:
            raise UsageError(f"--tol 必须是正数, 收到 {self.tol!r}")
        mu_cap = _positive(self.mu_cap)
        if mu_cap is None or mu_cap < 1:
            raise UsageError(f"--mu-cap 必须 >= 1, 收到 {self.mu_cap!r}")
        if self.output_format not in OUTPUT_FORMATS:
            raise UsageError(f"输出格式必须是 {OUTPUT_FORMATS} 之一, 收到 {self.output_format!r}")
        return self

    def ifs(self) -> GaussIFS:
        return GaussIFS.from_digits(parse_digit(d) for d in self.digits)

    @property
    def name(self) -> str:
        return self.label or self.ifs().label

    def to_dict(self) -> dict:
        data = asdict(self)
        data['digits'] = list(self.digits)
        return data

    @classmethod
    def from_dict(cls, data: dict) -> 'RunConfig':
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise UsageError(f"未知配置项: {', '.join(sorted(unknown))}")
        kwargs = dict(data)
        kwargs['digits'] = _split_digits(kwargs.get('digits', []))
        kwargs['h_target'] = str(kwargs['h_target'])
        kwargs['nu'] = _parse_nu(kwargs['nu'])
        for key in ('tol', 'expected'):
            if kwargs.get(key) is not None:
                kwargs[key] = str(kwargs[key])
        if 'mu_cap' in kwargs:
            kwargs['mu_cap'] = str(kwargs['mu_cap'])
        return cls(**kwargs)

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> 'RunConfig':
        return cls(
            digits=_split_digits(args.set),
            r=args.degree,
            h_target=args.h,
            nu=_parse_nu(args.nu),
            nu_prime=args.nu_prime,
            precision=args.digits,
            verify=not args.no_verify,
            tol=args.tol,
            mu_cap=args.mu_cap,
            output_format='json' if args.json else 'text',
            dump_matrix=args.dump_matrix,
            timings=args.timings,
        )


def _positive(value) -> Optional[float]:
    """可解析为正数时返回其 float 值, 否则 None"""
    try:
        number = float(parse_digit(value))
    except (InvalidArgumentError, OverflowError):
        return None
    return number if number > 0 else None


def _split_digits(value) -> List[str]:
    if value is None:
        return []
    if isinstance(value, str):
        return [part.strip() for part in value.split(',') if part.strip()]
    return [str(v).strip() for v in value]


def _parse_nu(value) -> Union[int, str]:
    if isinstance(value, int) and not isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text == 'auto':
        return 'auto'
    try:
        return int(text)
    except ValueError:
        raise UsageError(f"--nu 必须是整数或 auto, 收到 {value!r}")


def load_batch_file(path: str) -> Tuple[List[RunConfig], dict]:
    """
    读取 TOML 批处理文件: [defaults] 表加 [[rows]] 数组

    Returns:
        (每行的 RunConfig, defaults 原始表)
    """
    if not os.path.exists(path):
        raise UsageError(f"批处理文件未找到: {path}, 请提供包含 [[rows]] 的 TOML 文件。")
    try:
        with open(path, 'r', encoding='utf-8') as f:
            document = toml.load(f)
    except toml.TomlDecodeError as e:
        raise UsageError(f"批处理文件 {path} 解析失败, 请检查 TOML 格式是否正确。错误信息: {e}")

    defaults = document.get('defaults', {})
    rows = document.get('rows')
    if not rows:
        raise UsageError(f"批处理文件 {path} 中缺少 [[rows]], 至少需要一行。")

    configs = []
    for index, row in enumerate(rows, start=1):
        merged = {**defaults, **row}
        for key in _REQUIRED_BATCH_KEYS:
            if key not in merged:
                raise UsageError(f"第 {index} 行缺少 '{key}' 字段, 请在该行或 [defaults] 中添加。")
        unknown = set(merged) - set(_BATCH_KEYS)
        if unknown:
            raise UsageError(f"第 {index} 行含未知字段: {', '.join(sorted(unknown))}")
        data = {_BATCH_KEYS[key]: value for key, value in merged.items()}
        configs.append(RunConfig.from_dict(data).validate())
    return configs, defaults
