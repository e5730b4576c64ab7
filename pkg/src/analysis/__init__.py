"""
RNStab 分析模块
特征多项式求根、稳定性判据与根的渐近展开
"""

from .polynomials import QuarticCoefficients, RootSet, characteristic_chi, quartic_roots, chi_roots
from .stability import Classification, StabilityVerdict, classify, critical_dt, thresholds

__all__ = [
    "QuarticCoefficients",
    "RootSet",
    "characteristic_chi",
    "quartic_roots",
    "chi_roots",
    "Classification",
    "StabilityVerdict",
    "classify",
    "critical_dt",
    "thresholds",
]
