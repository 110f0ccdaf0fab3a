# src/cli/pipeline.py

import time

from src.certify.certificate import minimal_nu
from src.cli.config import RunConfig
from src.cli.report import RunReport
from src.domain.invariant_interval import invariant_interval
from src.domain.mesh import build_mesh, build_subintervals, coverage_report
from src.numerics.precision import Arithmetic
from src.solver.dimension_solver import DimensionProblem, SolverSettings, solve_dimension
from src.utils.error.error_handler import UsageError
from src.utils.logger.log_helper import cli_logger


def run(config: RunConfig) -> RunReport:
    """不变区间 → 子区间 → 网格 → 覆盖检验 → 证书 → 求根与包围"""
    config.validate()
    arith = Arithmetic(config.precision)
    ifs = config.ifs()
    timings = {}
    clock = time.perf_counter()

    def lap(name: str):
        nonlocal clock
        now = time.perf_counter()
        timings[name] = now - clock
        clock = now

    h_target = arith.real(config.h_target)
    mu_cap = arith.real(config.mu_cap)
    if config.nu == 'auto':
        nu = minimal_nu(ifs, config.r, invariant_interval(ifs, arith), arith)
    else:
        nu = config.nu
    if config.nu_prime > nu:
        raise UsageError(f"--nu-prime ({config.nu_prime}) 不能大于 ν ({nu})")

    inv = invariant_interval(ifs, arith, depth=nu)
    lap('domain')
    subintervals = build_subintervals(ifs, config.nu_prime, inv, mu_cap, h_target, config.r, arith)
    mesh = build_mesh(subintervals, config.r, h_target, arith)
    coverage = coverage_report(ifs, mesh, nu, inv)
    lap('mesh')
    cli_logger.info(f"{config.name}: {mesh.I} 个子区间, Q = {mesh.Q}, μ = {float(mesh.mu):.4f}, ν = {nu}")

    settings = SolverSettings(
        verify=config.verify,
        tol=arith.real(config.tol) if config.tol is not None else None,
    )
    problem = DimensionProblem(ifs, inv, mesh, nu, settings, config.nu_prime, mu_cap)
    lap('stencil')
    root, bracket = solve_dimension(problem)
    lap('solver')
    certificate = problem.certificate(root.s_mid)
    lap('certificate')

    if config.dump_matrix:
        fmt = 'binary' if config.dump_matrix.endswith('.bin') else 'text'
        problem.stencil.assemble(root.s_mid).dump(config.dump_matrix, fmt)

    return RunReport(config=config, nu=nu, inv=inv, mesh=mesh, coverage=coverage,
                     certificate=certificate, trials=list(problem.trials), root=root,
                     bracket=bracket, arith=arith, timings=timings)


def report_name(config: RunConfig) -> str:
    return f"{config.name}_r{config.r}_h{config.h_target}"
