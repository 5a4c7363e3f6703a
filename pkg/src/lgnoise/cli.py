"""``lgnoise`` command line: sweep, extrema, surface, oracle-check.

Exit status: 0 success, 1 configuration error, 2 I/O error, 3 check failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, convert, merge, parse_config_text
from .correlators import CorrelatorTriple, LGResult, chain_batch, correlator_closed
from .extrema import ExtremumCondition, solve_extremum
from .qubit import DensityMatrix
from .records import OutputRecord, RootRecord, serialize

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2
EXIT_CHECK = 3

OUTPUT_DIR_ENV = "LGNOISE_OUTPUT_DIR"
ORACLE_TOL = 1e-9
DEFAULT_STEPS = 500


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: config error: {message}\n")


# flag -> RunConfig field
_FLAGS = {
    "--channel": "channel",
    "--a": "a",
    "--tau": "tau",
    "--gamma-rtn": "gamma_rtn",
    "--Gamma": "Gamma",
    "--gamma": "gamma",
    "--Omega": "Omega",
    "--theta": "theta",
    "--phi": "phi",
    "--theta-range": "theta_range",
    "--phi-range": "phi_range",
    "--theta-steps": "theta_steps",
    "--phi-steps": "phi_steps",
    "--dt": "dt",
    "--dt-range": "dt_range",
    "--steps": "steps",
    "--time-unit": "time_unit",
    "--out": "out",
    "--format": "format",
    "--seed": "seed",
    "--samples": "samples",
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    for flag, dest in _FLAGS.items():
        kw = {"dest": dest, "default": None}
        if dest == "channel":
            kw["choices"] = ["rtn", "oun", "unitary"]
        elif dest == "format":
            kw["choices"] = ["csv", "jsonl"]
        elif dest == "time_unit":
            kw["choices"] = ["t", "nu"]
        common.add_argument(flag, **kw)
    common.add_argument("--config", default=None, help="key = value file; flags override it")
    common.add_argument("--method", choices=["closed", "chain"], default="closed",
                        help="surface: evaluate correlators in closed form or through the measurement chain")

    p = _Parser(prog="lgnoise", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("sweep", parents=[common], help="K3 and K3' over a dt grid")
    sub.add_parser("extrema", parents=[common], help="roots of the K3 extremum condition")
    sub.add_parser("surface", parents=[common], help="K3 over theta x phi (and dt)")
    sub.add_parser("oracle-check", parents=[common], help="measurement chain vs closed form")
    return p


def load_config(args):
    file_values = {}
    if args.config:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError(f"cannot read config file: {e.strerror}", args.config) from None
        file_values = parse_config_text(text, source=args.config)
    flag_values = {}
    for flag, dest in _FLAGS.items():
        raw = getattr(args, dest)
        if raw is not None:
            flag_values[dest] = convert(dest, raw, flag)
    return merge(file_values, flag_values)


def _output_path(cfg, default_name):
    base = os.environ.get(OUTPUT_DIR_ENV)
    if cfg.out is None:
        return Path(base) / default_name if base else None
    p = Path(cfg.out)
    if base and not p.is_absolute():
        p = Path(base) / p
    return p


def emit(text, cfg, default_name):
    path = _output_path(cfg, default_name)
    if path is None:
        sys.stdout.write(text)
        return None
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def _ext(cfg):
    return "csv" if cfg.format == "csv" else "jsonl"


def _dt_grid(cfg, channel, default_steps=DEFAULT_STEPS):
    """Raw-time dt grid. A range starting at 0 is open there."""
    scale = cfg.time_scale(channel)
    if cfg.dt_range is None:
        return np.array([cfg.dt * scale])
    lo, hi = cfg.dt_range
    n = cfg.steps or default_steps
    if lo == 0.0:
        pts = hi * np.arange(1, n + 1) / n
    else:
        pts = np.linspace(lo, hi, n)
    if np.any(pts <= 0):
        raise ConfigError("dt values must be positive", "dt_range")
    return pts * scale


def _records(channel, cfg, dts, thetas, phis, k3, c01, c12, c02, k3p, tag="grid"):
    regime = channel.regime
    out = []
    for i in range(len(dts)):
        res = LGResult(
            float(dts[i]), float(thetas[i]), float(phis[i]),
            CorrelatorTriple(float(c01[i]), float(c12[i]), float(c02[i]), 0.0, float(dts[i]), 2.0 * float(dts[i])),
            float(k3[i]), float(k3p[i]), regime,
        )
        out.append(OutputRecord.from_result(channel, res, cfg.time_unit, tag))
    return out


def _closed_cells(channel, dts, thetas):
    c2 = np.cos(thetas) ** 2
    d1 = np.asarray(channel.coherence(dts))
    d2 = np.asarray(channel.coherence(2.0 * dts))
    c01 = c2 + (1.0 - c2) * d1
    c02 = c2 + (1.0 - c2) * d2
    return c01, c01.copy(), c02


def cmd_sweep(cfg):
    cfg.validate(need_dt_range=True)
    channel = cfg.build_channel()
    dts = _dt_grid(cfg, channel)
    theta = math.pi / 2 if cfg.theta is None else cfg.theta
    phi = 0.0 if cfg.phi is None else cfg.phi
    th = np.full(len(dts), theta)
    ph = np.full(len(dts), phi)
    c01, c12, c02 = _closed_cells(channel, dts, th)
    k3 = c01 + c12 - c02
    k3p = -c01 - c12 - c02
    recs = _records(channel, cfg, dts, th, ph, k3, c01, c12, c02, k3p)
    path = emit(serialize(recs, OutputRecord, cfg.format), cfg, f"sweep.{_ext(cfg)}")
    i = int(np.argmax(k3))
    scale = cfg.time_scale(channel)
    print(
        f"{channel.describe()}: {len(recs)} rows, max K3 = {k3[i]:.12g} at dt = {dts[i] / scale:.12g} {cfg.time_unit}"
        + (f" -> {path}" if path else ""),
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_extrema(cfg):
    cfg.validate(need_dt_range=True)
    if cfg.dt_range is None:
        raise ConfigError("extrema needs dt-range as the search bracket", "dt_range")
    channel = cfg.build_channel()
    try:
        cond = ExtremumCondition.for_channel(channel)
    except ValueError as e:
        raise ConfigError(str(e), "channel") from None
    scale = cfg.time_scale(channel)
    lo, hi = cfg.dt_range
    roots = solve_extremum(cond, (lo * scale, hi * scale))
    recs = [RootRecord.from_root(r) for r in roots]
    path = emit(serialize(recs, RootRecord, cfg.format), cfg, f"extrema.{_ext(cfg)}")
    if not roots:
        print(f"{channel.describe()}: no extrema in bracket", file=sys.stderr)
    else:
        worst = max(r.residual for r in roots)
        print(
            f"{channel.describe()}: {len(roots)} roots ({cond.kind.value}), max residual {worst:.3e}"
            + (f" -> {path}" if path else ""),
            file=sys.stderr,
        )
    return EXIT_OK


def _angle_axis(single, rng, steps):
    if rng is None:
        return np.array([single])
    lo, hi = rng
    return np.linspace(lo, hi, steps)


def cmd_surface(cfg, method="closed"):
    cfg.validate(need_dt_range=True, need_angle_ranges=True)
    channel = cfg.build_channel()
    dts = _dt_grid(cfg, channel, default_steps=50)
    thetas = _angle_axis(cfg.theta, cfg.theta_range, cfg.theta_steps)
    phis = _angle_axis(cfg.phi, cfg.phi_range, cfg.phi_steps)
    D, TH, PH = (a.ravel() for a in np.meshgrid(dts, thetas, phis, indexing="ij"))
    if method == "chain":
        rng = np.random.default_rng(cfg.seed)
        rho = np.broadcast_to(DensityMatrix.random(rng).mat, (len(D), 2, 2))
        c01 = chain_batch(channel, rho, TH, PH, 0.0, D)[0]
        c12 = chain_batch(channel, rho, TH, PH, D, 2.0 * D)[0]
        c02 = chain_batch(channel, rho, TH, PH, 0.0, 2.0 * D)[0]
    else:
        c01, c12, c02 = _closed_cells(channel, D, TH)
    k3 = c01 + c12 - c02
    k3p = -c01 - c12 - c02
    recs = _records(channel, cfg, D, TH, PH, k3, c01, c12, c02, k3p)
    i = int(np.argmax(k3))
    recs.append(_records(channel, cfg, D[i:i + 1], TH[i:i + 1], PH[i:i + 1], k3[i:i + 1],
                         c01[i:i + 1], c12[i:i + 1], c02[i:i + 1], k3p[i:i + 1], tag="argmax")[0])
    path = emit(serialize(recs, OutputRecord, cfg.format), cfg, f"surface.{_ext(cfg)}")
    print(
        f"{channel.describe()}: {len(recs) - 1} cells, argmax K3 = {k3[i]:.12g} at "
        f"theta = {TH[i]:.6g}, phi = {PH[i]:.6g}" + (f" -> {path}" if path else ""),
        file=sys.stderr,
    )
    return EXIT_OK


def _default_horizon(channel):
    p = channel.params
    if channel.kind == "rtn":
        return 3.0 / p.gamma
    if channel.kind == "oun":
        return 5.0 / p.Gamma
    return 2.0 * math.pi / abs(p.Omega) if p.Omega else 1.0


def oracle_samples(channel, cfg):
    """Seeded random (state, theta, phi, ti, tj) tuples."""
    rng = np.random.default_rng(cfg.seed)
    n = cfg.samples
    horizon = cfg.dt_range[1] * cfg.time_scale(channel) if cfg.dt_range else _default_horizon(channel)
    rhos = np.array([DensityMatrix.random(rng).mat for _ in range(n)]).reshape(n, 2, 2)
    thetas = np.full(n, cfg.theta) if cfg.theta is not None else rng.uniform(-math.pi, math.pi, n)
    phis = np.full(n, cfg.phi) if cfg.phi is not None else rng.uniform(-math.pi / 2, math.pi / 2, n)
    ti = rng.uniform(0.0, horizon, n)
    tj = ti + rng.uniform(0.0, horizon, n)
    return rhos, thetas, phis, ti, tj


def run_oracle_check(channel, cfg):
    """Return ``(report_lines, max_deviation)``."""
    rhos, thetas, phis, ti, tj = oracle_samples(channel, cfg)
    n = len(ti)
    lines = [f"channel: {channel.describe()}", f"samples: {n}", f"seed: {cfg.seed}"]
    if n == 0:
        lines.append("max_abs_deviation: 0")
        lines.append("status: pass (no samples)")
        return lines, 0.0
    chain, joint = chain_batch(channel, rhos, thetas, phis, ti, tj)
    closed = np.array([correlator_closed(channel, float(t), float(a), float(b)) for t, a, b in zip(thetas, ti, tj)])
    dev = np.maximum(np.abs(chain - closed), np.abs(joint - chain))
    worst = float(dev.max())
    lines.append(f"max_abs_deviation: {worst:.3e}")
    lines.append(f"max_chain_vs_closed: {float(np.abs(chain - closed).max()):.3e}")
    lines.append(f"max_joint_vs_chain: {float(np.abs(joint - chain).max()):.3e}")
    if worst >= ORACLE_TOL:
        lines.append("status: FAIL")
        for k in np.argsort(dev)[::-1][:5]:
            if dev[k] < ORACLE_TOL:
                break
            lines.append(
                f"worst: theta={thetas[k]:.17g} phi={phis[k]:.17g} ti={ti[k]:.17g} tj={tj[k]:.17g} "
                f"chain={chain[k]:.17g} closed={closed[k]:.17g} rho={rhos[k].tolist()}"
            )
    else:
        lines.append("status: pass")
    return lines, worst


def cmd_oracle_check(cfg):
    cfg.validate()
    channel = cfg.build_channel()
    lines, worst = run_oracle_check(channel, cfg)
    text = "\n".join(lines) + "\n"
    path = _output_path(cfg, "oracle-check.txt")
    if path is None:
        sys.stdout.write(text)
    else:
        emit(text, cfg, "oracle-check.txt")
        sys.stdout.write(text)
    return EXIT_OK if worst < ORACLE_TOL else EXIT_CHECK


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args)
        if args.command == "sweep":
            return cmd_sweep(cfg)
        if args.command == "extrema":
            return cmd_extrema(cfg)
        if args.command == "surface":
            return cmd_surface(cfg, args.method)
        return cmd_oracle_check(cfg)
    except ConfigError as e:
        print(f"lgnoise: config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"lgnoise: I/O error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
