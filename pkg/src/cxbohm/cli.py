"""Command-line entry point: ``cxbohm trajectory|contour|ensemble|check``.

Exit status: 0 success, 1 a requested check failed, 2 configuration could
not be parsed, 3 configuration failed validation, 4 output could not be
written.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, config as cfgmod, export
from ._accel import BACKEND
from .checks import run_suites
from .ensemble import RNG_ALGORITHM, evolve_real_ensemble, quadrature_expectation, sample_born
from .oracles import conserved_value, step_contour_value
from .trajectory import integrate_trajectory
from .wavefunctions import HarmonicOscillator, NodeProximityError, ParameterError, UnsupportedScenarioError

log = logging.getLogger("cxbohm")

OUTPUT_DIR_ENV = "CXBOHM_OUTPUT_DIR"
EXIT_OK, EXIT_CHECK, EXIT_PARSE, EXIT_VALIDATION, EXIT_IO = 0, 1, 2, 3, 4


def _scale(s):
    """Factor from x to the exported coordinate (X = alpha x for the oscillator)."""
    return s.alpha if isinstance(s, HarmonicOscillator) else 1.0


def _meta(cfg):
    return {
        "command": cfg.command,
        "version": __version__,
        "backend": BACKEND,
        "seed": cfg.seed,
        "rng": RNG_ALGORITHM,
        "config": cfgmod.to_dict(cfg),
    }


def output_path(cfg, cli_out=None) -> Path:
    if cli_out:
        return Path(cli_out)
    if cfg.output:
        return Path(cfg.output)
    ext = "csv" if cfg.format == "csv" else "jsonl"
    return Path(os.environ.get(OUTPUT_DIR_ENV, ".")) / f"{cfg.command}.{ext}"


def _indexed(path: Path, i: int, n: int) -> Path:
    return path if n == 1 else path.with_name(f"{path.stem}_ic{i}{path.suffix}")


# -- commands -----------------------------------------------------------------


def run_trajectory(cfg, out: Path, workers: int = 1):
    s = cfg.scenario
    sc = _scale(s)
    T = cfg.time_grid()
    x0s = [z / sc for z in cfg.initial]

    def one(x0):
        return integrate_trajectory(s, x0, (cfg.t0, cfg.t1), cfg.integrator, t_eval=T)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        trajs = list(pool.map(one, x0s))

    written = []
    records = []
    for i, tr in enumerate(trajs):
        q = np.asarray(conserved_value(s, tr.x, tr.t))
        X = tr.x * sc
        drift = float(np.max(np.abs(q - q[0])))
        log.info("trajectory %d: x0=%s status=%s drift=%.3e", i, cfg.initial[i], tr.status.value, drift)
        rows = list(zip(tr.t, X.real, X.imag, q.real, q.imag))
        if cfg.format == "csv":
            written.append(export.write_csv(_indexed(out, i, len(trajs)), export.TRAJECTORY_COLUMNS, rows))
        else:
            records.append(
                {
                    "record": "trajectory",
                    "index": i,
                    "x0": cfg.initial[i],
                    "status": tr.status.value,
                    "accepted_steps": tr.accepted_steps,
                    "rejected_steps": tr.rejected_steps,
                    "max_q_drift": drift,
                }
            )
            records.extend(
                {"record": "sample", "index": i, **dict(zip(export.TRAJECTORY_COLUMNS, map(float, r)))} for r in rows
            )
    if cfg.format == "records":
        written.append(export.write_records(out, _meta(cfg), records))
    return written, EXIT_OK


def contour_values(s, X):
    """Trajectory-contour function on complex grid points (X units for the oscillator)."""
    x = X / _scale(s)
    if s.label == "step":
        return np.asarray(step_contour_value(x, s.k, s.R))
    if s.label == "plane":
        return np.asarray(x.imag, dtype=float)
    if isinstance(s, HarmonicOscillator):
        return np.abs(np.asarray(conserved_value(s, x, 0.0)))
    raise UnsupportedScenarioError(f"no time-independent contour function for {s.label}")


def level_sets(re, im, Z, levels):
    """[(level, segment index, closed, (N, 2) points)] via contourpy."""
    import contourpy

    gen = contourpy.contour_generator(x=re, y=im, z=Z)
    out = []
    for lev in levels:
        for j, line in enumerate(gen.lines(lev)):
            closed = bool(len(line) > 2 and np.allclose(line[0], line[-1]))
            out.append((lev, j, closed, np.asarray(line)))
    return out


def run_contour(cfg, out: Path, workers: int = 1):
    c = cfg.contour
    re = np.linspace(c.re_min, c.re_max, c.points_re)
    im = np.linspace(c.im_min, c.im_max, c.points_im)
    X = re[None, :] + 1j * im[:, None]
    Z = contour_values(cfg.scenario, X)
    rows = list(zip(X.real.ravel(), X.imag.ravel(), Z.ravel()))
    sets = level_sets(re, im, Z, c.levels) if c.levels else []
    level_rows = [(lev, j, closed, p[0], p[1]) for lev, j, closed, line in sets for p in line]
    log.info("contour: grid max %.6g, %d level segments", float(Z.max()), len(sets))
    if cfg.format == "csv":
        written = [export.write_csv(out, export.CONTOUR_COLUMNS, rows)]
        if sets:
            lvl = out.with_name(f"{out.stem}_levels{out.suffix}")
            written.append(export.write_csv(lvl, export.LEVEL_COLUMNS, level_rows))
        return written, EXIT_OK
    records = [{"record": "grid", **dict(zip(export.CONTOUR_COLUMNS, map(float, r)))} for r in rows]
    records += [
        {"record": "level", "level": float(a), "segment": int(b), "closed": bool(cl), "x_re": float(xr), "x_im": float(xi)}
        for a, b, cl, xr, xi in level_rows
    ]
    return [export.write_records(out, _meta(cfg), records)], EXIT_OK


def derived_seed(seed: int, i: int) -> int:
    """Independent stream for the i-th direct Born sample of an ensemble run."""
    return int(np.random.SeedSequence([seed, i + 1]).generate_state(1, np.uint64)[0])


def run_ensemble(cfg, out: Path, workers: int = 1):
    from scipy import stats

    s = cfg.scenario
    T = cfg.time_grid()
    snap = sample_born(s, cfg.t0, cfg.ensemble_n, cfg.seed)
    rows = []
    for i, t in enumerate(T):
        if t > snap.t:
            snap = evolve_real_ensemble(snap, float(t), cfg.integrator)
        pos = snap.positions[snap.ok]
        direct = sample_born(s, float(t), cfg.ensemble_n, derived_seed(cfg.seed, i))
        ks = stats.ks_2samp(pos, direct.positions)
        mq = quadrature_expectation(s, lambda x: x, float(t))
        vq = quadrature_expectation(s, lambda x: x**2, float(t)) - mq**2
        rows.append(
            (float(t), float(pos.mean()), float(pos.var()), float(ks.statistic), float(ks.pvalue), mq, vq, int((~snap.ok).sum()))
        )
    if cfg.format == "csv":
        return [export.write_csv(out, export.ENSEMBLE_COLUMNS, rows)], EXIT_OK
    records = [{"record": "ensemble", **dict(zip(export.ENSEMBLE_COLUMNS, r))} for r in rows]
    return [export.write_records(out, _meta(cfg), records)], EXIT_OK


def run_check(cfg, out: Path, workers: int = 1):
    results = run_suites(cfg.checks, cfg.integrator)
    for r in results:
        log.info("%s %s measured=%.3e threshold=%.3e", "PASS" if r.passed else "FAIL", r.name, r.measured, r.threshold)
    rows = [(r.name, r.passed, float(r.measured), float(r.threshold), r.detail) for r in results]
    if cfg.format == "csv":
        written = [export.write_csv(out, export.CHECK_COLUMNS, rows)]
    else:
        records = [{"record": "check", **dict(zip(export.CHECK_COLUMNS, r))} for r in rows]
        written = [export.write_records(out, _meta(cfg), records)]
    return written, EXIT_OK if all(r.passed for r in results) else EXIT_CHECK


COMMANDS = {
    "trajectory": run_trajectory,
    "contour": run_contour,
    "ensemble": run_ensemble,
    "check": run_check,
}


def run(cfg, out=None, workers: int = 1):
    """Execute a RunConfig; returns (written paths, exit status)."""
    return COMMANDS[cfg.command](cfg, output_path(cfg, out), workers)


# -- argument handling ------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="TOML run configuration")
    common.add_argument("--seed", type=int, help="RNG seed (overrides the config)")
    common.add_argument("--out", metavar="PATH", help=f"output file (default: ${OUTPUT_DIR_ENV}/<command>.csv)")
    common.add_argument("--format", choices=cfgmod.FORMATS, help="csv or line-delimited JSON records")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="SECTION.KEY=VALUE")
    common.add_argument("--workers", type=int, default=1, help="threads for independent trajectories")
    common.add_argument("--echo-config", metavar="PATH", help="write the effective configuration as TOML")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="cxbohm", description="Complex-plane quantum trajectories.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("trajectory", parents=[common], help="integrate trajectories from initial conditions")
    sub.add_parser("contour", parents=[common], help="trajectory-contour function on a complex grid")
    sub.add_parser("ensemble", parents=[common], help="Born ensemble transport and statistics")
    sub.add_parser("check", parents=[common], help="run the invariant suites")
    return p


def load_config(args) -> cfgmod.RunConfig:
    raw = {}
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise cfgmod.ConfigParseError(f"cannot read config: {exc}") from exc
        try:
            raw = cfgmod.tomli.loads(text)
        except cfgmod.tomli.TOMLDecodeError as exc:
            raise cfgmod.ConfigParseError(f"invalid TOML: {exc}") from exc
    raw = cfgmod.apply_overrides(raw, args.overrides)
    if args.seed is not None:
        raw["seed"] = args.seed
    if args.format is not None:
        raw.setdefault("output", {})["format"] = args.format
    return cfgmod.from_dict(raw, args.command)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = load_config(args)
    except cfgmod.ConfigParseError as exc:
        print(f"cxbohm: config error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (cfgmod.ConfigValidationError, ParameterError, ValueError) as exc:
        print(f"cxbohm: invalid config: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        if args.echo_config:
            Path(args.echo_config).write_text(cfgmod.dumps(cfg))
        written, status = run(cfg, args.out, args.workers)
    except OSError as exc:
        print(f"cxbohm: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ParameterError, UnsupportedScenarioError, NodeProximityError, ValueError) as exc:
        print(f"cxbohm: invalid run: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    for path in written:
        print(path)
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
