#!/usr/bin/env python
# -*- coding: utf-8 -*-

from .precision import Arithmetic, float_arithmetic, NATIVE_DPS

__all__ = ["Arithmetic", "float_arithmetic", "NATIVE_DPS"]
