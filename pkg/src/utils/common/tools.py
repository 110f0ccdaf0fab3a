#!/usr/bin/env python
# -*- coding: utf-8 -*-

from decimal import ROUND_DOWN, Decimal
from typing import Union


def adjust_decimal_places(value: Decimal, precision: int) -> Decimal:
    """调整小数位数到指定的整数精度，向下取整"""
    if not isinstance(precision, int):
        raise ValueError("Precision must be an integer")
    if precision <= 0:
        return value.quantize(Decimal('1'), rounding=ROUND_DOWN)
    return value.quantize(Decimal(f'0.{"0" * precision}'), rounding=ROUND_DOWN)


def agreeing_decimal_places(lo: Union[str, Decimal], hi: Union[str, Decimal],
                            max_places: int) -> int:
    """lo 与 hi 向下截断后仍相同的最多小数位数 (不超过 max_places)"""
    lo, hi = Decimal(str(lo)), Decimal(str(hi))
    places = max(max_places, 0)
    while places > 0 and adjust_decimal_places(lo, places) != adjust_decimal_places(hi, places):
        places -= 1
    return places


def matching_decimal_places(value: Union[str, Decimal], reference: Union[str, Decimal]) -> int:
    """两个十进制数从小数点起逐位相同的位数, 用于和参考值比对"""
    a = format(Decimal(str(value)), 'f')
    b = format(Decimal(str(reference)), 'f')
    int_a, _, frac_a = a.partition('.')
    int_b, _, frac_b = b.partition('.')
    if int_a != int_b:
        return -1
    count = 0
    for x, y in zip(frac_a, frac_b):
        if x != y:
            break
        count += 1
    return count
