"""
RNStab 命令行
子命令 spectrum / roots / simulate / thresholds / stability-map / critical-dt / accuracy-scan / mesh-study
数据写到标准输出或 --out 指定的文件，日志写到标准错误
"""

import argparse
import sys
from typing import Any, Dict, List, Optional, Sequence, Tuple

from loguru import logger
from pydantic import ValidationError

from ..config.settings import RunConfig, load_run_config, setup_logging, settings
from ..config.presets import ParameterPresets, PresetName, get_preset_config
from ..model.core import PhysicalParams, Discretization, ParameterError
from ..model.spectral import build_spectrum, spectrum_extremes, truncation_from_h
from ..analysis.polynomials import characteristic_chi, chi_roots
from ..analysis.stability import (
    classify,
    critical_dt,
    dt_instability_bound,
    alpha1_joint_limit,
    nominal_joint_limit,
    thresholds,
)
from ..solvers.coupled import Scheme, InitialData, simulate
from ..sweep.runner import (
    Evaluation,
    RangeSpec,
    SweepSpec,
    best_accuracy,
    critical_dt_scaling,
    run_accuracy_scan,
    run_mesh_study,
    run_stability_map,
    table_patterns,
)
from ..sweep.report import ReportError, render_document, render_report, write_text


EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_INTERRUPTED = 130

SCHEME_CHOICES = {
    "explicit-rn": Scheme.EXPLICIT_RN,
    "recurrence": Scheme.RECURRENCE,
    "implicit": Scheme.IMPLICIT_REF,
}

EVALUATION_CHOICES = {
    "analytic": Evaluation.ANALYTIC,
    "empirical": Evaluation.EMPIRICAL,
    "both": Evaluation.BOTH,
}

# 参数键 -> (类型, 帮助)
PARAMETER_FLAGS = {
    "rho_f": (float, "流体密度 ρ_f"),
    "rho_s": (float, "结构密度 ρ_s"),
    "h_s": (float, "管壁厚度 H_s"),
    "beta": (float, "弹性系数 β"),
    "psi": (float, "弯曲刚度 ψ"),
    "radius": (float, "管道半径 R"),
    "length": (float, "管道长度 L"),
    "dt": (float, "时间步长 Δt"),
    "n_modes": (int, "保留模态数"),
    "n_steps": (int, "时间步数"),
    "alpha": (float, "Robin 系数 α"),
}


class UsageError(Exception):
    """命令行用法错误"""


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


def parse_float_list(text: str) -> List[float]:
    try:
        values = [float(item) for item in text.split(",") if item.strip()]
    except ValueError as e:
        raise ValueError(f"malformed number list '{text}'") from e
    if not values:
        raise ValueError("empty number list")
    return values


def parse_init(text: str) -> InitialData:
    """eta1,eta0,u0"""
    values = parse_float_list(text)
    if len(values) != 3:
        raise ValueError(f"--init expects eta1,eta0,u0, got '{text}'")
    return InitialData(eta1=values[0], eta0=values[1], u0=values[2])


def _bracket(text: Optional[str]) -> Optional[Tuple[float, float]]:
    if text is None:
        return None
    parts = text.split(":")
    if len(parts) != 2:
        raise ValueError(f"--bracket expects lo:hi, got '{text}'")
    lo, hi = float(parts[0]), float(parts[1])
    if not 0 < lo < hi:
        raise ValueError(f"--bracket needs 0 < lo < hi, got '{text}'")
    return lo, hi


def _common_parser() -> argparse.ArgumentParser:
    """各子命令共用的全局参数与物理参数"""
    common = _ArgumentParser(add_help=False)
    group = common.add_argument_group("全局选项")
    group.add_argument("--config", help="键值参数文件 (key = value，# 注释)")
    group.add_argument(
        "--preset",
        choices=[p.value for p in PresetName],
        help="参数预设，作为参数文件之下的基础层",
    )
    group.add_argument("--out", help="输出文件 (默认: 标准输出)")
    group.add_argument("--format", choices=["csv", "json"], default=None, help="输出格式")
    group.add_argument("--jobs", type=int, default=None, help="并发网格点数 (默认: 1)")
    group.add_argument("--verbose", action="store_true", help="输出调试日志")

    params = common.add_argument_group("物理与离散参数 (覆盖参数文件)")
    for key, (kind, help_text) in PARAMETER_FLAGS.items():
        flags = [f"--{key.replace('_', '-')}"]
        if "_" in key:
            flags.append(f"--{key}")
        if key == "n_steps":
            flags.append("--steps")
        params.add_argument(*flags, dest=key, type=kind, default=None, help=help_text)
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    presets = ", ".join(f"{p['key']} ({p['description']})" for p in ParameterPresets.get_recommended_presets())
    parser = _ArgumentParser(
        prog="rnstab",
        description="RNStab - 显式 Robin-Neumann 格式的模态稳定性实验室",
        epilog=f"可用预设: {presets}",
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_ArgumentParser)
    sub.required = True

    p = sub.add_parser("spectrum", parents=[common], help="附加质量与拉普拉斯特征值")
    p.add_argument("--h", type=float, default=None, help="网格尺寸 h，给定时模态数取 round(L/h)")
    p.set_defaults(handler=cmd_spectrum, default_format="csv")

    p = sub.add_parser("roots", parents=[common], help="单个模态的特征多项式根")
    p.add_argument("--mode-index", "--mode_index", dest="mode_index", type=int, default=1, help="模态编号 (默认: 1)")
    p.set_defaults(handler=cmd_roots, default_format="json")

    p = sub.add_parser("simulate", parents=[common], help="单个模态的时间推进")
    p.add_argument("--scheme", choices=list(SCHEME_CHOICES), default="explicit-rn", help="推进格式")
    p.add_argument("--mode-index", "--mode_index", dest="mode_index", type=int, default=1, help="模态编号 (默认: 1)")
    p.add_argument("--init", default="1,1,0", help="初值 eta1,eta0,u0 (默认: 1,1,0)")
    p.add_argument("--continue-after-blow-up", action="store_true", help="爆破后继续推进")
    p.set_defaults(handler=cmd_simulate, default_format="csv")

    p = sub.add_parser("thresholds", parents=[common], help="稳定性阈值 η̄、η₁、α₁、η₂、α₂")
    p.set_defaults(handler=cmd_thresholds, default_format="json")

    p = sub.add_parser("stability-map", parents=[common], help="α × Δt × 网格 的稳定性图")
    p.add_argument("--alpha-range", "--alpha_range", dest="alpha_range", help="α 范围 min:max:count[:log|lin]")
    p.add_argument("--dt-range", "--dt_range", dest="dt_range", help="Δt 范围 min:max:count[:log|lin]")
    p.add_argument("--modes-list", "--modes_list", dest="modes_list", help="模态数列表，如 10,50")
    p.add_argument("--h-list", "--h_list", dest="h_list", help="网格尺寸列表，如 0.5,0.1")
    p.add_argument("--evaluation", choices=list(EVALUATION_CHOICES), default="analytic", help="评估方式")
    p.add_argument("--init", default="1,1,0", help="仿真初值 eta1,eta0,u0")
    p.set_defaults(handler=cmd_stability_map, default_format="csv")

    p = sub.add_parser("critical-dt", parents=[common], help="临界时间步长 Δt*")
    p.add_argument("--alpha-range", "--alpha_range", dest="alpha_range", help="给定时输出 α·Δt* 的变化")
    p.add_argument("--tol", type=float, default=None, help="相对区间宽度 (默认: 1e-3)")
    p.add_argument("--bracket", default=None, help="搜索区间 lo:hi")
    p.set_defaults(handler=cmd_critical_dt, default_format="json")

    p = sub.add_parser("accuracy-scan", parents=[common], help="显式格式相对隐式参考的误差")
    p.add_argument("--alpha-range", "--alpha_range", dest="alpha_range", required=True,
                   help="α 范围 min:max:count[:log|lin]")
    p.add_argument("--init", default="1,1,0", help="初值 eta1,eta0,u0")
    p.set_defaults(handler=cmd_accuracy_scan, default_format="csv")

    p = sub.add_parser("mesh-study", parents=[common], help="网格加密下的 Δt* 与 α₁")
    p.add_argument("--h-list", "--h_list", dest="h_list", required=True, help="网格尺寸列表，如 0.5,0.25,0.1")
    p.add_argument("--dt-ratio", "--dt_ratio", dest="dt_ratio", type=float, default=0.2,
                   help="α₁ 计算所用的 Δt/h (默认: 0.2)")
    p.add_argument("--tol", type=float, default=None, help="Δt* 的相对区间宽度")
    p.set_defaults(handler=cmd_mesh_study, default_format="csv")

    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """预设 < 参数文件 < 命令行"""
    base = get_preset_config(args.preset) if args.preset else None
    overrides = {key: getattr(args, key) for key in PARAMETER_FLAGS}
    return load_run_config(args.config, overrides, base)


def _setup(args: argparse.Namespace) -> Tuple[RunConfig, PhysicalParams, Discretization]:
    config = resolve_config(args)
    params, disc = config.validated()
    logger.debug(f"Run config: {config.model_dump()}")
    return config, params, disc


def _fmt(args: argparse.Namespace) -> str:
    return args.format or args.default_format


def _jobs(args: argparse.Namespace) -> int:
    jobs = settings.default_jobs if args.jobs is None else args.jobs
    if jobs < 1:
        raise ValueError(f"--jobs must be at least 1, got {jobs}")
    return jobs


def _mode(params: PhysicalParams, n_modes: int, index: int):
    if not 1 <= index <= n_modes:
        raise ParameterError(f"invalid mode index: {index} (n_modes={n_modes})")
    return build_spectrum(params, n_modes)[index - 1]


def cmd_spectrum(args: argparse.Namespace) -> None:
    config, params, disc = _setup(args)
    n_modes = disc.n_modes if args.h is None else truncation_from_h(params.length, args.h)
    rows = [{"i": m.index, "mu": m.mu, "lambda": m.lam} for m in build_spectrum(params, n_modes)]
    write_text(render_document(rows, _fmt(args)), args.out)


def cmd_roots(args: argparse.Namespace) -> None:
    config, params, disc = _setup(args)
    mode = _mode(params, disc.n_modes, args.mode_index)
    root_set = chi_roots(params, mode, config.alpha, disc.dt)
    document: Dict[str, Any] = root_set.to_dict()
    document.update({
        "mode": mode.index,
        "alpha": config.alpha,
        "dt": disc.dt,
        "chi": list(characteristic_chi(params, mode, config.alpha, disc.dt).c),
        "numerics": settings.get_numerics_config(),
    })
    if _fmt(args) == "csv":
        document = {"rows": document["roots"]}
    write_text(render_document(document, _fmt(args)), args.out)


def cmd_simulate(args: argparse.Namespace) -> None:
    config, params, disc = _setup(args)
    mode = _mode(params, disc.n_modes, args.mode_index)
    traj = simulate(
        SCHEME_CHOICES[args.scheme], params, disc, mode, config.alpha, parse_init(args.init),
        stop_on_blow_up=not args.continue_after_blow_up,
    )
    if traj.blown_up:
        logger.info(f"Mode {mode.index} blew up at step {traj.blow_up}")
    document = {"startup": traj.metadata["startup"], "rows": traj.series()}
    write_text(render_document(document, _fmt(args)), args.out)


def cmd_thresholds(args: argparse.Namespace) -> None:
    config, params, disc = _setup(args)
    spectrum = build_spectrum(params, disc.n_modes)
    document = thresholds(params, spectrum, disc.dt, config.alpha).to_dict()
    document.update(spectrum_extremes(spectrum))
    if config.alpha > 0:
        verdict = classify(params, spectrum, config.alpha, disc.dt)
        document["instability_sufficient"] = verdict.instability_sufficient
        document["gamma_max"] = verdict.gamma_max
        document["dt_instability_bound"] = dt_instability_bound(params, spectrum, config.alpha)
    document["alpha_1_joint_limit"] = alpha1_joint_limit(params, 0.2)
    document["alpha_1_nominal_limit"] = nominal_joint_limit(params)
    document["numerics"] = settings.get_numerics_config()
    write_text(render_document(document, _fmt(args)), args.out)


def cmd_stability_map(args: argparse.Namespace) -> None:
    config, params, disc = _setup(args)
    alpha_grid = RangeSpec.parse(args.alpha_range) if args.alpha_range else [config.alpha]
    dt_grid = RangeSpec.parse(args.dt_range) if args.dt_range else [disc.dt]
    kwargs = dict(
        alpha_grid=alpha_grid,
        dt_grid=dt_grid,
        params=params,
        evaluation=EVALUATION_CHOICES[args.evaluation],
        init=parse_init(args.init),
    )
    if args.h_list:
        spec = SweepSpec.from_h_values(parse_float_list(args.h_list), **kwargs)
    else:
        modes = [int(v) for v in parse_float_list(args.modes_list)] if args.modes_list else [disc.n_modes]
        spec = SweepSpec(mesh_grid=tuple(modes), **kwargs)

    records = run_stability_map(spec, _jobs(args))
    for name, example in table_patterns(records).items():
        if example is not None:
            logger.info(f"Pattern {name}: {example}")
    write_text(render_report(records, _fmt(args)), args.out)


def cmd_critical_dt(args: argparse.Namespace) -> None:
    config, params, disc = _setup(args)
    spectrum = build_spectrum(params, disc.n_modes)
    bracket = _bracket(args.bracket)
    if args.alpha_range:
        alphas = RangeSpec.parse(args.alpha_range).values()
        document = critical_dt_scaling(params, spectrum, alphas, args.tol, bracket)
    else:
        document = critical_dt(params, spectrum, config.alpha, args.tol, bracket).to_dict()
        document["alpha"] = config.alpha
        document["dt_instability_bound"] = dt_instability_bound(params, spectrum, config.alpha)
    document["numerics"] = settings.get_numerics_config()
    write_text(render_document(document, _fmt(args)), args.out)


def cmd_accuracy_scan(args: argparse.Namespace) -> None:
    config, params, disc = _setup(args)
    alphas = RangeSpec.parse(args.alpha_range).values()
    records = run_accuracy_scan(
        params, disc.dt, alphas, disc.n_steps, parse_init(args.init),
        n_modes=disc.n_modes, jobs=_jobs(args),
    )
    best = best_accuracy(records)
    if best is not None:
        logger.info(f"Most accurate stable alpha: {best.alpha:.6g}")
    write_text(render_report(records, _fmt(args)), args.out)


def cmd_mesh_study(args: argparse.Namespace) -> None:
    config, params, disc = _setup(args)
    records = run_mesh_study(
        params, config.alpha, parse_float_list(args.h_list), args.dt_ratio, args.tol, _jobs(args),
    )
    write_text(render_report(records, _fmt(args)), args.out)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """命令行入口，返回退出码"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:
        # --help
        return int(e.code or 0)

    setup_logging(level="DEBUG" if args.verbose else None)
    logger.debug(f"{settings.app_name} {settings.app_version}: {args.command}")

    try:
        args.handler(args)
        return EXIT_OK
    except KeyboardInterrupt:
        print("\n👋 已中断", file=sys.stderr)
        return EXIT_INTERRUPTED
    except OSError as e:
        # ReportError 与缺失的参数文件
        logger.error(f"I/O error: {e}")
        return EXIT_IO
    except (ValidationError, ValueError, UsageError) as e:
        logger.error(f"Usage error: {e}")
        return EXIT_USAGE


__all__ = ["main", "build_parser", "parse_init", "parse_float_list", "ReportError"]
