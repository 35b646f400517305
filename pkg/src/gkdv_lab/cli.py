"""Command-line front end: ``gkdv-lab {simulate,verify,smoothing,growth}``.

Configuration is an INI file (see ``configs/`` and the README). Unknown
sections or keys are rejected. Exit codes: 0 success, 1 configuration error,
2 blow-up, 3 verification failure.
"""
from __future__ import annotations

import argparse
import configparser
import os
import sys
from dataclasses import dataclass, field, fields

import numpy as np
from scipy import fft as sfft

from . import dispersion, nonlinearity, normal_form
from .experiments import (growth_track, render_plot, smoothing_scan, write_report)
from .fourier import BudgetExceeded, from_modes, random_sobolev
from .nonlinearity import MultilinearSpec, PolyNonlinearity, sym_ik
from .solver import BlowUp, SolverConfig, simulate, write_diagnostics_csv, write_trajectory_csv

EXIT_OK, EXIT_CONFIG, EXIT_BLOWUP, EXIT_VERIFY = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


def _floats(text: str) -> tuple:
    return tuple(float(x) for x in text.replace(";", ",").split(",") if x.strip())


def _boxes(text: str) -> tuple:
    out = []
    for part in text.split(","):
        if part.strip():
            n, _, K = part.partition(":")
            out.append((int(n), int(K)))
    return tuple(out)


def _modes(text: str) -> tuple:
    out = []
    for part in text.split(","):
        if part.strip():
            k, _, c = part.partition(":")
            out.append((int(k), complex(c.strip().replace(" ", ""))))
    return tuple(out)


@dataclass
class SolverSection:
    N: int = 32
    dt: float = 1e-4
    T: float = 1.0
    sample_every: int = 100
    equation: str = "original"
    P: str = "1:3"
    s_list: str = "0, 1"


@dataclass
class DataSection:
    s: float = 1.0
    seed: int = 0
    delta: float = 0.05
    amplitude: float = 1.0
    modes: str = ""


@dataclass
class SmoothingSection:
    gammas: str = "0.25, 0.5, 0.75, 1.0"
    threshold: float = 0.5


@dataclass
class GrowthSection:
    T0: float = 1.0
    alpha_max: float = 1.5
    drift_max: float = 1e-6


@dataclass
class VerifySection:
    boxes: str = "2:50, 3:30, 4:12, 5:8"
    c_A: float = 1.0
    c_C: float = 0.0
    c_D: float = 0.25
    C_hl: float = 4.0
    identity_K: int = 8
    random_tuples: int = 100000
    sigma_k1_max: int = 1000
    sigma_K: int = 10
    sigma_bound: float = 10.0
    cancel_N: int = 12
    cancel_seeds: int = 5
    polar_N: int = 6
    tolerance: float = 1e-12


@dataclass
class RunConfig:
    solver: SolverSection = field(default_factory=SolverSection)
    data: DataSection = field(default_factory=DataSection)
    smoothing: SmoothingSection = field(default_factory=SmoothingSection)
    growth: GrowthSection = field(default_factory=GrowthSection)
    verify: VerifySection = field(default_factory=VerifySection)
    out: str = "out"
    threads: int = 1

    def poly(self) -> PolyNonlinearity:
        return PolyNonlinearity.parse(self.solver.P)

    def solver_config(self) -> SolverConfig:
        sv = self.solver
        return SolverConfig(sv.N, sv.dt, sv.T, self.poly(), sv.sample_every, sv.equation,
                            s_list=_floats(sv.s_list))

    def initial(self):
        d = self.data
        if d.modes.strip():
            return from_modes(_modes(d.modes))
        return random_sobolev(d.s, self.solver.N, d.seed, d.delta, d.amplitude)

    def constants(self):
        v = self.verify
        return dispersion.ComparabilityConstants(v.c_A, v.c_C or None, v.c_D, v.C_hl)

    def to_ini(self) -> str:
        cp = configparser.ConfigParser()
        cp.optionxform = str
        for name in ("solver", "data", "smoothing", "growth", "verify"):
            sec = getattr(self, name)
            cp[name] = {f.name: str(getattr(sec, f.name)) for f in fields(sec)}
        cp["output"] = {"dir": self.out}
        from io import StringIO
        buf = StringIO()
        cp.write(buf)
        return buf.getvalue()


def load_config(path: str | None) -> RunConfig:
    cfg = RunConfig()
    if path is None:
        return cfg
    cp = configparser.ConfigParser()
    cp.optionxform = str
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for name in cp.sections():
        if name == "output":
            for key, val in cp[name].items():
                if key != "dir":
                    raise ConfigError(f"unknown key [output] {key}")
                cfg.out = val
            continue
        if name not in ("solver", "data", "smoothing", "growth", "verify"):
            raise ConfigError(f"unknown section [{name}]")
        sec = getattr(cfg, name)
        types = {f.name: f.type for f in fields(sec)}
        for key, val in cp[name].items():
            if key not in types:
                raise ConfigError(f"unknown key [{name}] {key}")
            default = getattr(sec, key)
            try:
                conv = type(default)(val) if not isinstance(default, str) else val
            except ValueError as exc:
                raise ConfigError(f"[{name}] {key}: cannot parse {val!r}") from exc
            setattr(sec, key, conv)
    return cfg


def _validate(cfg: RunConfig):
    try:
        cfg.solver_config()
        cfg.poly()
        cfg.constants()
        _floats(cfg.smoothing.gammas)
        _boxes(cfg.verify.boxes)
        if cfg.data.modes.strip():
            _modes(cfg.data.modes)
    except ValueError as exc:
        msg = str(exc)
        for key in ("dt", "T", "N", "sample_every", "equation"):
            if msg.startswith(key + " "):
                raise ConfigError(f"[solver] {msg}") from exc
        raise ConfigError(msg) from exc
    if cfg.threads < 1:
        raise ConfigError("--threads must be >= 1")


def _sidecar(cfg: RunConfig, command: str):
    os.makedirs(cfg.out, exist_ok=True)
    with open(os.path.join(cfg.out, f"{command}.resolved.ini"), "w") as fh:
        fh.write(cfg.to_ini())


def cmd_simulate(cfg: RunConfig) -> int:
    try:
        traj = simulate(cfg.initial(), cfg.solver_config())
    except BlowUp as exc:
        print(f"blow-up: {exc}; last good time {exc.t_last:.6g}", file=sys.stderr)
        return EXIT_BLOWUP
    write_trajectory_csv(traj, os.path.join(cfg.out, "trajectory.csv"))
    write_diagnostics_csv(traj, os.path.join(cfg.out, "diagnostics.csv"))
    print(f"simulate: {len(traj)} samples to t={traj.times[-1]:.6g}")
    return EXIT_OK


def run_verification(cfg: RunConfig, log=print) -> bool:
    """Run every exact check; returns ``True`` iff all pass."""
    v = cfg.verify
    c = cfg.constants()
    ok = True

    def report(name, passed, detail=""):
        nonlocal ok
        ok &= bool(passed)
        log(f"[{'PASS' if passed else 'FAIL'}] {name} {detail}".rstrip())

    # dispersion identity
    for n in range(2, 6):
        t = dispersion.tuple_box(n, v.identity_K)
        same = np.array_equal(dispersion.h_n_array(t), dispersion.h_n_telescoped_array(t))
        report(f"h_n identity n={n} K={v.identity_K}", same)
    rng = np.random.default_rng(0)
    bad = 0
    for i in range(v.random_tuples):
        n = int(rng.integers(2, 9))
        t = [int(x) or 1 for x in rng.integers(-1000, 1001, size=n)]
        bad += dispersion.h_n(t) != dispersion.h_n_telescoped(t)
    report(f"h_n identity {v.random_tuples} random tuples", bad == 0)
    # case analysis
    reports = []
    for n, K in _boxes(v.boxes):
        rep = dispersion.verify_cases(n, K, c)
        reports.append(rep)
        detail = "" if rep.ok else "counterexamples: " + ", ".join(map(str, rep.violations[:10]))
        report(f"cases n={n} K={K}", rep.ok, detail)
    dispersion.write_exhaustive_csv(reports, os.path.join(cfg.out, "cases.csv"))
    # resonant set combinatorics
    for k, n, K in ((1, 3, 3), (2, 4, 3), (1, 2, 4)):
        report(f"inclusion-exclusion k={k} n={n} K={K}",
               nonlinearity.inclusion_exclusion_residual(k, n, K) == 0)
    # polarization
    for n in (2, 3, 4):
        vs = [random_sobolev(1.0, v.polar_N, 100 + j) for j in range(n)]
        for label, spec in (("ik", MultilinearSpec(n, sym_ik)),
                            ("T_NF", normal_form.nf_symmetric_spec(n, v.C_hl))):
            r = nonlinearity.polarize_check(spec, vs, relative=True)
            report(f"polarization n={n} {label}", r <= v.tolerance, f"residual={r:.3g}")
    # sigma - mu
    for n in (3, 4):
        sw = normal_form.sigma_mu_sweep(n, v.sigma_k1_max, v.sigma_K, v.C_hl)
        report(f"sigma-mu n={n}", sw.mismatches == 0 and sw.constant <= v.sigma_bound,
               f"tuples={sw.count} constant={sw.constant:.4g}")
    # cancellations
    nfc = normal_form.NormalFormConfig(C_hl=v.C_hl)
    cases = [("self_n", PolyNonlinearity.monomial(n)) for n in (2, 3, 4)]
    cases += [("mixed_nm", PolyNonlinearity(((1.0, n), (1.0, m)))) for n, m in ((2, 3), (3, 4))]
    for kind, P in cases:
        worst = 0.0
        for sd in range(v.cancel_seeds):
            f = random_sobolev(1.0, v.cancel_N, 2 * sd)
            u = random_sobolev(1.0, v.cancel_N, 2 * sd + 1)
            worst = max(worst, normal_form.cancellation_residual(kind, f, u, P, nfc))
        report(f"cancellation {kind} {P.degrees}", worst <= v.tolerance, f"residual={worst:.3g}")
    return ok


def cmd_verify(cfg: RunConfig) -> int:
    for n, K in _boxes(cfg.verify.boxes):
        if not 2 <= n <= 5:
            raise ConfigError(f"[verify] boxes: n={n} outside 2..5")
        if (2 * K) ** n > dispersion.MAX_TUPLES:
            raise ConfigError(f"[verify] boxes: n={n} K={K} exceeds the enumeration budget")
    try:
        ok = run_verification(cfg)
    except BudgetExceeded as exc:
        raise ConfigError(str(exc)) from exc
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_smoothing(cfg: RunConfig) -> int:
    sv, d = cfg.solver, cfg.data
    try:
        rep = smoothing_scan(d.s, cfg.poly(), sv.N, sv.dt, sv.T, _floats(cfg.smoothing.gammas),
                             d.seed, d.delta, d.amplitude, sv.sample_every)
    except BlowUp as exc:
        print(f"blow-up: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    write_report(rep, os.path.join(cfg.out, "smoothing.csv"))
    render_plot(rep, os.path.join(cfg.out, "smoothing.svg"))
    print(f"smoothing: gamma_fit={rep.gamma_fit:.6g} (threshold {cfg.smoothing.threshold:g})")
    return EXIT_OK


def cmd_growth(cfg: RunConfig) -> int:
    sv, d = cfg.solver, cfg.data
    try:
        rep = growth_track(d.s, cfg.poly(), sv.N, sv.dt, sv.T, d.seed, cfg.growth.T0, d.delta,
                           d.amplitude, sv.sample_every)
    except BlowUp as exc:
        print(f"blow-up: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    write_report(rep, os.path.join(cfg.out, "growth.csv"))
    render_plot(rep, os.path.join(cfg.out, "growth.svg"))
    print(f"growth: alpha={rep.alpha_fit:.6g} mass_drift={rep.meta['mass_drift']:.3g} "
          f"hamiltonian_drift={rep.meta['hamiltonian_drift']:.3g}")
    g = cfg.growth
    guards = (rep.alpha_fit <= g.alpha_max and rep.meta["mass_drift"] <= g.drift_max
              and rep.meta["hamiltonian_drift"] <= g.drift_max)
    print(f"growth guards (alpha <= {g.alpha_max:g}, drift <= {g.drift_max:g}): "
          f"{'ok' if guards else 'violated'}")
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "verify": cmd_verify, "smoothing": cmd_smoothing,
            "growth": cmd_growth}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gkdv-lab", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="INI configuration file")
    p.add_argument("--out", help="output directory (overrides [output] dir)")
    p.add_argument("--seed", type=int, help="override [data] seed")
    p.add_argument("--threads", type=int, default=1, help="FFT worker threads")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.out:
            cfg.out = args.out
        if args.seed is not None:
            cfg.data.seed = args.seed
        cfg.threads = args.threads
        _validate(cfg)
        _sidecar(cfg, args.command)
        with sfft.set_workers(cfg.threads):
            return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
