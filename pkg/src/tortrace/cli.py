"""Command-line experiment runner.

Subcommands:
  residue    compute the residue / canonical trace / smoothing trace of A
  predict    write the expansion prediction as CSV
  verify     run the oracle, fit, compare against the prediction (exit 0 iff PASS)
  selftest   run the invariant property suites
  hs-check   functional-calculus engine checks (matrix function + identities)
  benchmark  time the compiled kernels against the numpy fallback
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from .config import ExperimentConfig
from .expand import predict_expansion_res, predict_expansion_tr
from .oracle import (OracleSeries, geometric_grid, matrix_series,
                     multiplier_series, verify_expansion)
from .report import (prediction_csv_lines, report_header, residual_plot,
                     write_lines)
from .traces import (canonical_trace, residue_density_integrated,
                     smoothing_trace)


def _add_common(parser):
    parser.add_argument("--config", required=True, help="experiment config file")
    parser.add_argument("--out", default=None, help="output directory override")
    parser.add_argument("--t-min", type=float, default=None)
    parser.add_argument("--t-max", type=float, default=None)
    parser.add_argument("--t-count", type=int, default=None)
    parser.add_argument("--order", type=int, default=None,
                        help="expansion order count override")
    parser.add_argument("--tol", type=float, default=None,
                        help="coefficient relative tolerance override")
    parser.add_argument("--threads", type=int, default=None,
                        help="thread cap for compiled kernels")


def _load(args) -> ExperimentConfig:
    cfg = ExperimentConfig.from_file(args.config)
    if args.out is not None:
        cfg.out_dir = args.out
    for attr, name in (("t_min", "t_min"), ("t_max", "t_max"),
                       ("t_count", "t_count")):
        val = getattr(args, attr, None)
        if val is not None:
            setattr(cfg, name, val)
    if getattr(args, "order", None) is not None:
        cfg.order_count = args.order
    if getattr(args, "tol", None) is not None:
        cfg.coeff_rtol = args.tol
    if getattr(args, "threads", None) is not None:
        _set_threads(args.threads)
    cfg.validate()
    return cfg


def _set_threads(count: int):
    try:
        import numba

        numba.set_num_threads(max(1, count))
    except Exception:
        pass


def cmd_residue(args) -> int:
    cfg = _load(args)
    lines = [f"operator A: order {cfg.symbol.order}, dimension {cfg.n}"]
    res = residue_density_integrated(cfg.symbol)
    lines.append(f"noncommutative residue: {res}")
    try:
        tr = canonical_trace(cfg.symbol)
        lines.append(f"canonical trace (finite-part route): {tr}")
    except ValueError as exc:
        lines.append(f"canonical trace: undefined ({exc})")
    if cfg.symbol.order.real < -cfg.n:
        st = smoothing_trace(cfg.symbol)
        lines.append(f"smoothing trace (order below -n): {st}")
    else:
        lines.append("smoothing trace: undefined (order not below -n)")
    for line in lines:
        print(line)
    out = Path(cfg.out_dir)
    write_lines(out / f"{cfg.label}_residue.txt",
                report_header(cfg.label, cfg.to_text()) + lines)
    return 0


def _predict(cfg: ExperimentConfig):
    operator = cfg.elliptic_operator()
    if cfg.mode == "res":
        return predict_expansion_res(cfg.symbol, operator, cfg.function,
                                     cfg.order_count), operator
    return predict_expansion_tr(cfg.symbol, operator, cfg.function,
                                cfg.order_count), operator


def cmd_predict(args) -> int:
    cfg = _load(args)
    prediction, _ = _predict(cfg)
    out = Path(cfg.out_dir)
    write_lines(out / f"{cfg.label}_prediction.csv",
                prediction_csv_lines(prediction))
    for e, c, tag in prediction:
        print(f"t^({complex(e).real:+.6f}) coefficient {c:.12g}  [{tag}]")
    print(f"wrote {out / (cfg.label + '_prediction.csv')}")
    return 0


def cmd_verify(args) -> int:
    cfg = _load(args)
    t0 = time.time()
    prediction, operator = _predict(cfg)
    ts = geometric_grid(cfg.t_min, cfg.t_max, cfg.t_count)
    if cfg.truncation == 0:
        series = multiplier_series(cfg.symbol, operator, cfg.function, ts)
    else:
        series = matrix_series(cfg.symbol, operator, cfg.function, ts,
                               cfg.truncation)
    next_exp = (-(cfg.symbol.order.real + cfg.n - cfg.order_count)
                / operator.m0)
    report = verify_expansion(prediction, series, coeff_rtol=cfg.coeff_rtol,
                              magnitude_floor=cfg.magnitude_floor,
                              next_exponent=next_exp,
                              slope_slack=cfg.slope_slack)
    out = Path(cfg.out_dir)
    write_lines(out / f"{cfg.label}_series.csv", series.csv_lines())
    write_lines(out / f"{cfg.label}_prediction.csv",
                prediction_csv_lines(prediction))
    write_lines(out / f"{cfg.label}_fit.csv", report.fit.csv_lines())
    lines = report.lines()
    verdict = "PASS" if report.passed else "FAIL"
    lines.append(f"verdict: {verdict}  (runtime {time.time() - t0:.1f} s)")
    if cfg.plots:
        err = residual_plot(out / f"{cfg.label}_residual.svg", series.ts,
                            series.values, prediction)
        if err:
            lines.append(err)
    write_lines(out / f"{cfg.label}_report.txt",
                report_header(cfg.label, cfg.to_text()) + lines)
    for line in lines:
        print(line)
    return 0 if report.passed else 1


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    ok = run_selftest(seed=args.seed, corrupt_moments=args.corrupt_moments)
    print("selftest:", "PASS" if ok else "FAIL")
    return 0 if ok else 1


def cmd_hs_check(args) -> int:
    from .hs import (HSIntegrator, cauchy_pompeiu_residual, matrix_function_eig,
                     matrix_spec, vanishing_slopes)
    from .testfunctions import bump

    ok = True
    f = bump(1.0, 2.0)
    integrator = HSIntegrator(f)
    for j, tol in ((0, 1e-6), (1, 1e-6), (2, 1e-6)):
        worst = max(cauchy_pompeiu_residual(f, lam, j, integrator)
                    for lam in (0.5, 1.25, 1.5, 1.75, 3.0))
        good = worst <= tol
        ok &= good
        print(f"[{'PASS' if good else 'FAIL'}] scalar identity j={j}: "
              f"max residual {worst:.2e} (tol {tol:.0e})")

    size = args.size
    rng = np.random.default_rng(11)
    basis = rng.normal(size=(size, size)) + 1j * rng.normal(size=(size, size))
    q, _ = np.linalg.qr(basis)
    h = (q * rng.uniform(1.0, 10.0, size)[None, :]) @ q.conj().T
    h = 0.5 * (h + h.conj().T)
    t0 = time.time()
    via_hs = HSIntegrator(f, matrix_spec()).matrix(h)
    via_eig = matrix_function_eig(h, f)
    rel = (np.linalg.norm(via_hs - via_eig)
           / max(np.linalg.norm(via_eig), 1e-300))
    good = rel <= 1e-6
    ok &= good
    print(f"[{'PASS' if good else 'FAIL'}] matrix function vs eigendecomposition: "
          f"rel err {rel:.2e} ({size}x{size}, {time.time() - t0:.1f} s)")

    slopes = vanishing_slopes(f, [1, 2, 3, 4])
    for order, slope in zip([1, 2, 3, 4], slopes):
        good = slope >= 0.85 * order
        ok &= good
        print(f"[{'PASS' if good else 'FAIL'}] dbar vanishing order {order}: "
              f"measured slope {slope:.2f}")
    print("hs-check:", "PASS" if ok else "FAIL")
    return 0 if ok else 1


def cmd_benchmark(args) -> int:
    from ._kernels import (HAS_NUMBA, compensated_dot_numba,
                           compensated_dot_numpy)

    rng = np.random.default_rng(3)
    print(f"numba available: {HAS_NUMBA}")
    for size in args.sizes:
        values = rng.normal(size=size) + 1j * rng.normal(size=size)
        weights = rng.normal(size=size)
        t0 = time.time()
        ref = compensated_dot_numpy(values, weights)
        t_numpy = time.time() - t0
        line = f"compensated dot n={size}: numpy/fsum {t_numpy * 1e3:8.2f} ms"
        if HAS_NUMBA:
            compensated_dot_numba(values[:8], weights[:8])  # warm the JIT
            t0 = time.time()
            got = compensated_dot_numba(values, weights)
            t_numba = time.time() - t0
            line += (f"   numba {t_numba * 1e3:8.2f} ms   "
                     f"speedup {t_numpy / max(t_numba, 1e-9):6.1f}x   "
                     f"|diff| {abs(got - ref):.2e}")
        print(line)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tortrace",
        description="trace expansion predictions and spectral oracles on flat tori")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("residue", help="residue and trace functionals of A")
    _add_common(p)
    p.set_defaults(func=cmd_residue)

    p = sub.add_parser("predict", help="expansion prediction CSV")
    _add_common(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("verify", help="oracle vs prediction verification")
    _add_common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("selftest", help="invariant property suites")
    p.add_argument("--seed", type=int, default=20240801)
    p.add_argument("--corrupt-moments", action="store_true",
                   help=argparse.SUPPRESS)  # harness self-test hook
    p.set_defaults(func=cmd_selftest)

    p = sub.add_parser("hs-check", help="functional calculus engine checks")
    p.add_argument("--size", type=int, default=50, help="Hermitian test size")
    p.set_defaults(func=cmd_hs_check)

    p = sub.add_parser("benchmark", help="kernel timing: numba vs numpy")
    p.add_argument("--sizes", type=int, nargs="+",
                   default=[100_000, 1_000_000, 4_000_000])
    p.set_defaults(func=cmd_benchmark)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
