"""
RNStab 求解器模块
"""

from .coupled import Scheme, InitialData, ModalTrajectory, simulate, simulate_modes, growth_rate

__all__ = ["Scheme", "InitialData", "ModalTrajectory", "simulate", "simulate_modes", "growth_rate"]
