# src/numerics/precision.py

import math
from decimal import Decimal
from fractions import Fraction
from typing import Iterable, Tuple, Union

import mpmath
import numpy as np

from src.utils.error.error_handler import InvalidArgumentError

# float64 能可靠表示的十进制位数
NATIVE_DPS = 15


class Arithmetic:
    """
    工作精度算术

    dps <= 15 时走 float64 (math / numpy float64 数组),
    否则使用独立的 mpmath.MPContext, 数组为 numpy object 数组。
    不同实例之间互不共享精度状态。
    """

    def __init__(self, dps: int = 34):
        if not isinstance(dps, int) or isinstance(dps, bool) or dps < 1:
            raise InvalidArgumentError(f"精度必须为正整数, 收到 {dps!r}")
        self.dps = dps
        self.native = dps <= NATIVE_DPS
        if self.native:
            self.ctx = None
            self.dtype = np.float64
            self._eps = float(np.finfo(np.float64).eps)
        else:
            self.ctx = mpmath.MPContext()
            self.ctx.dps = dps
            self.dtype = object
            self._eps = +self.ctx.eps

    def __repr__(self):
        mode = "float64" if self.native else "mpf"
        return f"Arithmetic(dps={self.dps}, {mode})"

    # ---- 标量 ----

    def real(self, x: Union[int, float, str, Fraction, Decimal]):
        """把 int / Fraction / str / float / Decimal 转为工作精度实数"""
        if isinstance(x, Fraction):
            if self.native:
                return x.numerator / x.denominator
            return self.ctx.mpf(x.numerator) / self.ctx.mpf(x.denominator)
        if isinstance(x, Decimal):
            x = str(x)
        if self.native:
            return float(x)
        if isinstance(x, (float, np.floating)):
            # 按十进制字面量解释, 如 h=0.001; np.float64 的 repr 带类型名
            return self.ctx.mpf(repr(float(x)))
        if isinstance(x, np.integer):
            return self.ctx.mpf(int(x))
        return self.ctx.mpf(x)

    @property
    def zero(self):
        return self.real(0)

    @property
    def one(self):
        return self.real(1)

    @property
    def pi(self):
        return math.pi if self.native else +self.ctx.pi

    @property
    def eps(self):
        """1 的单位舍入"""
        return self._eps

    def exp(self, x):
        return math.exp(x) if self.native else self.ctx.exp(x)

    def ln(self, x):
        return math.log(x) if self.native else self.ctx.log(x)

    def sqrt(self, x):
        return math.sqrt(x) if self.native else self.ctx.sqrt(x)

    def sin(self, x):
        return math.sin(x) if self.native else self.ctx.sin(x)

    def cos(self, x):
        return math.cos(x) if self.native else self.ctx.cos(x)

    def tan(self, x):
        return math.tan(x) if self.native else self.ctx.tan(x)

    def log10(self, x):
        return math.log10(x) if self.native else self.ctx.log10(x)

    def power(self, x, y):
        if self.native:
            return math.pow(x, y)
        return self.ctx.power(x, y)

    def ceil(self, x) -> int:
        return math.ceil(x) if self.native else int(self.ctx.ceil(x))

    def floor(self, x) -> int:
        return math.floor(x) if self.native else int(self.ctx.floor(x))

    def fsum(self, values: Iterable):
        return math.fsum(values) if self.native else self.ctx.fsum(values)

    def ulp(self, x):
        ax = abs(x)
        if ax == 0:
            return self._eps * self._eps
        return ax * self._eps

    def widen(self, lo, hi) -> Tuple:
        """向外各舍入一个 ulp"""
        return lo - self.ulp(lo), hi + self.ulp(hi)

    def to_str(self, x) -> str:
        """十进制科学计数法, 位数足以回读"""
        if self.native:
            return format(float(x), ".16e")
        digits = self.dps + 3
        text = self.ctx.nstr(self.ctx.mpf(x), digits, strip_zeros=False)
        return format(Decimal(text), f".{digits - 1}e")

    # ---- 数组 ----

    def array(self, values: Iterable) -> np.ndarray:
        return np.array([self._coerce(v) for v in values], dtype=self.dtype)

    def zeros(self, shape) -> np.ndarray:
        if self.native:
            return np.zeros(shape, dtype=np.float64)
        return np.full(shape, self.zero, dtype=object)

    def ones(self, shape) -> np.ndarray:
        if self.native:
            return np.ones(shape, dtype=np.float64)
        return np.full(shape, self.one, dtype=object)

    def exp_array(self, values: np.ndarray) -> np.ndarray:
        if self.native:
            return np.exp(values)
        flat = [self.ctx.exp(v) for v in np.ravel(values)]
        return np.array(flat, dtype=object).reshape(np.shape(values))

    def ln_array(self, values: np.ndarray) -> np.ndarray:
        if self.native:
            return np.log(values)
        flat = [self.ctx.log(v) for v in np.ravel(values)]
        return np.array(flat, dtype=object).reshape(np.shape(values))

    def to_float_array(self, values: np.ndarray) -> np.ndarray:
        return np.array([float(v) for v in np.ravel(values)], dtype=np.float64).reshape(
            np.shape(values))

    def _coerce(self, v):
        if self.native:
            return float(v)
        if isinstance(v, self.ctx.mpf):
            return v
        return self.real(v)


def float_arithmetic() -> Arithmetic:
    """双精度快速路径, 用于结构性计算与测试"""
    return Arithmetic(NATIVE_DPS)
