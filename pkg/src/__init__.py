"""
RNStab - 显式 Robin-Neumann 格式的模态稳定性实验室
简化流固耦合模型的模态推进、特征多项式分析与参数扫描
"""

__version__ = "1.0.0"
__author__ = "RNStab Team"
