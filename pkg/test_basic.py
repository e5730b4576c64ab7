"""
基础功能测试
用于验证RNStab系统的核心流程：谱 -> 根 -> 分类 -> 仿真
"""

import sys
from pathlib import Path

# 添加项目路径
sys.path.insert(0, str(Path(__file__).parent))

from src.config.settings import RunConfig
from src.model.spectral import build_spectrum
from src.analysis.polynomials import chi_roots
from src.analysis.stability import classify, thresholds
from src.solvers.coupled import Scheme, InitialData, simulate


def test_spectrum_and_roots():
    """测试谱与特征根"""
    print("🔍 测试谱与特征根...")

    params, disc = RunConfig().validated()
    spectrum = build_spectrum(params, disc.n_modes)
    roots = chi_roots(params, spectrum[0], 1e3, disc.dt)

    print(f"  μ₁ = {spectrum[0].mu:.6f}, λ₁ = {spectrum[0].lam:.6f}")
    print(f"  模态 1 谱半径: {roots.spectral_radius:.12f}")
    assert len(roots.roots) == 4
    print("✅ 特征根测试完成\n")


def test_classification():
    """测试稳定性分类"""
    print("🧭 测试稳定性分类...")

    params, disc = RunConfig().validated()
    spectrum = build_spectrum(params, disc.n_modes)
    for alpha in (1e1, 1e3, 1e5):
        verdict = classify(params, spectrum, alpha, disc.dt)
        print(f"  α={alpha:g} -> {verdict.classification.value} (ρ={verdict.spectral_radius:.6f})")

    limits = thresholds(params, spectrum, disc.dt)
    print(f"  α₁ = {limits.alpha_1}, α₂ = {limits.alpha_2}")
    assert limits.alpha_2 is not None
    print("✅ 分类测试完成\n")


def test_simulation():
    """测试时间推进"""
    print("🎬 测试时间推进...")

    params, disc = RunConfig(n_steps=500).validated()
    mode = build_spectrum(params, 1)[0]
    traj = simulate(Scheme.EXPLICIT_RN, params, disc, mode, 1e2, InitialData(1.0, 1.0))

    print(f"  步数: {traj.n_steps}, 爆破: {traj.blow_up}")
    assert not traj.blown_up
    print("✅ 仿真测试完成\n")


def main():
    """主测试函数"""
    print("🚀 RNStab 基础功能测试")
    print("=" * 40)

    test_spectrum_and_roots()
    test_classification()
    test_simulation()

    print("🎉 所有测试完成!")


if __name__ == "__main__":
    main()
