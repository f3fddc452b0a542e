"""Command-line front end.

    qmacro <command> [--config PATH] [--set key=value]... [--out PATH]
                     [--format csv|json] [--seed N]
    qmacro validate PATH [--command NAME] [--set key=value]...

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

import numpy as np
import yaml

from . import __version__, bec, macrometer, matterwave, relstate, squid
from .errors import ArgumentError, NumericError, QMacroError
from .qcore import CONSTANTS, DensityMatrix

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
RESERVED = ("command", "format", "seed", "out")


class ConfigError(ArgumentError):
    pass


@dataclass(frozen=True)
class Param:
    default: Any
    kind: type = float
    lo: float | None = None
    hi: float | None = None
    choices: tuple = ()

    def coerce(self, key: str, raw):
        try:
            if self.kind is bool:
                if isinstance(raw, str):
                    if raw.lower() not in ("true", "false", "1", "0"):
                        raise ValueError(raw)
                    value = raw.lower() in ("true", "1")
                else:
                    value = bool(raw)
            elif self.kind is int:
                if isinstance(raw, float) and not raw.is_integer():
                    raise ValueError(raw)
                value = int(float(raw)) if isinstance(raw, str) else int(raw)
            elif self.kind is float:
                value = float(raw)
            else:
                value = str(raw)
        except (TypeError, ValueError):
            raise ConfigError(f"{key}: cannot read {raw!r} as {self.kind.__name__}") from None
        if self.choices and value not in self.choices:
            raise ConfigError(f"{key}: {value!r} not one of {', '.join(map(str, self.choices))}")
        if self.lo is not None and value < self.lo:
            raise ConfigError(f"{key}: {value} below minimum {self.lo:g}")
        if self.hi is not None and value > self.hi:
            raise ConfigError(f"{key}: {value} above maximum {self.hi:g}")
        return value


SCHEMAS: dict[str, dict[str, Param]] = {
    "squid-spectrum": {
        "C": Param(100.0, lo=1e-6), "i_c": Param(1.0, lo=0.0), "phi_ext": Param(0.5),
        "n_points": Param(1024, int, lo=squid.MIN_POINTS), "n_levels": Param(4, int, lo=2, hi=64),
        "sweep_C_min": Param(50.0, lo=1e-6), "sweep_C_max": Param(800.0, lo=1e-6),
        "sweep_points": Param(0, int, lo=0, hi=200),
    },
    "squid-tunnel": {
        "C": Param(100.0, lo=1e-6), "i_c": Param(1.0, lo=0.0), "n_points": Param(1024, int, lo=squid.MIN_POINTS),
        "gamma_ratio": Param(0.0, lo=0.0), "periods": Param(1.0, lo=0.0), "n_times": Param(101, int, lo=2),
        "model": Param("two-level", str, choices=("two-level", "full")),
    },
    "squid-wigner": {
        "C": Param(400.0, lo=1e-6), "i_c": Param(2.0, lo=0.0), "n_points": Param(1024, int, lo=squid.MIN_POINTS),
        "gamma_ratio": Param(1.0, lo=0.0), "gamma_t_max": Param(5.0, lo=0.0),
        "n_snapshots": Param(6, int, lo=1, hi=50), "nx": Param(128, int, lo=8), "np": Param(101, int, lo=8),
    },
    "talbot-scan": {
        "mass_amu": Param(matterwave.C70_MASS_AMU, lo=1e-9), "velocity": Param(100.0, lo=1e-9),
        "d": Param(1e-6, lo=1e-12), "open_fraction": Param(0.5, lo=1e-6, hi=1 - 1e-6),
        "L": Param(0.0, lo=0.0), "n_slits": Param(32, int, lo=16), "n_scan": Param(16, int, lo=2),
        "n_angles": Param(32, int, lo=1), "angular_spread": Param(0.0, lo=0.0),
        "points_per_period": Param(64, int, lo=8), "model": Param("wave", str, choices=("wave", "ray")),
    },
    "talbot-visibility": {
        "V0": Param(1.0, lo=0.0, hi=1.0), "temperature": Param(300.0, lo=1e-12), "sigma_eff": Param(1e-17, lo=1e-40),
        "L": Param(0.38, lo=1e-12), "p_max_ratio": Param(5.0, lo=0.0), "n_points": Param(51, int, lo=2),
        "reference_mass_amu": Param(matterwave.C70_MASS_AMU, lo=1e-9), "target_mass_amu": Param(0.0, lo=0.0),
    },
    "bec-cat": {
        "N": Param(10, int, lo=1, hi=bec.MAX_ATOMS), "n": Param(0, int, lo=0), "phi": Param(0.0),
        "kappa": Param(1.0, lo=0.0), "omega": Param(0.0), "t_max": Param(0.05, lo=0.0),
        "n_times": Param(51, int, lo=2), "loss_mode": Param(1, int, choices=(0, 1, 2)),
    },
    "bec-tau": {
        "a": Param(5.3e-9, lo=1e-30), "ref_N_nc": Param(10.0, lo=1e-30), "ref_N": Param(1e3, lo=1e-30),
        "ref_tau": Param(1e-3, lo=1e-300), "N_nc": Param(1e4, lo=1e-30), "N": Param(1e7, lo=1e-30),
        "quoted_tau": Param(1e-13, lo=1e-300), "n_points": Param(21, int, lo=2),
        "mass_amu": Param(86.909, lo=1e-9), "temperature": Param(100e-9, lo=1e-15), "density": Param(1e20, lo=1e-30),
    },
    "envariance": {
        "weights": Param("1/2,1/2", str), "phases": Param("", str),
    },
    "darwinism": {
        "n_fragments": Param(8, int, lo=1, hi=12), "overlap": Param(0.0, lo=0.0, hi=1.0),
        "hidden_fragments": Param(0, int, lo=0, hi=4), "p0": Param(0.5, lo=1e-12, hi=1 - 1e-12),
    },
    "chain": {
        "eps_P": Param(0.0, lo=0.0, hi=1.0), "eps_R": Param(0.0, lo=0.0, hi=1.0), "eps_N": Param(0.0, lo=0.0, hi=1.0),
        "neuron_tau": Param(relstate.NEURON_TAU, lo=1e-300), "neuron_t": Param(1e-18, lo=0.0),
    },
    "macro-table": {},
}


@dataclass
class RunConfig:
    command: str
    parameters: dict
    format: str = "csv"
    seed: int = 0
    output_path: str | None = None

    def echo(self) -> dict:
        # the output path is left out so that copies of a run stay byte-identical
        return {"command": self.command, "format": self.format, "seed": self.seed,
                "parameters": dict(sorted(self.parameters.items()))}


@dataclass
class ResultEnvelope:
    config: RunConfig
    series: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    tool_version: str = __version__

    def __post_init__(self):
        lengths = {len(v) for v in self.series.values()}
        if len(lengths) > 1:
            raise NumericError(f"series columns have unequal lengths {sorted(lengths)}")


def _read_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid: {exc}") from None
    if data is None:
        return {}
    if not isinstance(data, dict) or any(isinstance(v, (dict, list)) for v in data.values()):
        raise ConfigError(f"config {path} must be a flat key: value mapping")
    return data


def _parse_sets(items) -> dict:
    out = {}
    for item in items or ():
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def resolve(command: str | None, file_values: dict, overrides: dict,
            fmt: str | None = None, seed: int | None = None, out: str | None = None) -> RunConfig:
    merged = {**file_values, **overrides}
    command = command or merged.get("command")
    if command is None:
        raise ConfigError("command: missing; put it in the config or pass --command")
    if command not in SCHEMAS:
        raise ConfigError(f"command: unknown command {command!r}")
    if "command" in merged and str(merged["command"]) != command:
        raise ConfigError(f"command: config names {merged['command']!r} but {command!r} was requested")
    schema = SCHEMAS[command]
    unknown = sorted(k for k in merged if k not in schema and k not in RESERVED)
    if unknown:
        raise ConfigError(f"{unknown[0]}: unknown key for {command}")
    params = {k: p.coerce(k, merged[k]) if k in merged else p.default for k, p in schema.items()}
    fmt = fmt or str(merged.get("format", "csv"))
    if fmt not in ("csv", "json"):
        raise ConfigError(f"format: {fmt!r} not one of csv, json")
    seed = seed if seed is not None else Param(0, int, lo=0).coerce("seed", merged.get("seed", 0))
    return RunConfig(command, params, fmt, seed, out or merged.get("out"))


# --- commands -------------------------------------------------------------------------


def _cmd_squid_spectrum(cfg: RunConfig) -> ResultEnvelope:
    p = cfg.parameters
    if p["sweep_points"] >= 2:
        Cs = np.geomspace(p["sweep_C_min"], p["sweep_C_max"], p["sweep_points"])
        fit = squid.splitting_scaling(Cs, i_c=p["i_c"], phi_ext=p["phi_ext"], n_points=p["n_points"])
        return ResultEnvelope(cfg, {"C": fit["C"], "sqrt_C": np.sqrt(fit["C"]), "delta_E": fit["delta_E"],
                                    "ln_delta_E": np.log(fit["delta_E"])},
                              {"slope": fit["slope"], "intercept": fit["intercept"], "r2": fit["r2"]})
    params = squid.SquidParams(C=p["C"], i_c=p["i_c"], phi_ext=p["phi_ext"], n_points=p["n_points"])
    sp = squid.solve_spectrum(params, p["n_levels"])
    series = {"phi": sp.phi, "potential": params.potential(sp.phi)}
    for k in range(p["n_levels"]):
        series[f"psi_{k}"] = sp.wavefunctions[k]
    summary = {"delta_E": sp.delta_E, "mean_flux_L": sp.mean_flux_L, "mean_flux_R": sp.mean_flux_R,
               "barrier": sp.barrier, "boundary_weight": sp.boundary_weight, "beta_L": params.beta_L}
    for k, e in enumerate(sp.energies):
        summary[f"E_{k}"] = float(e)
    return ResultEnvelope(cfg, series, summary)


def _cmd_squid_tunnel(cfg: RunConfig) -> ResultEnvelope:
    p = cfg.parameters
    sp = squid.solve_spectrum(squid.SquidParams(C=p["C"], i_c=p["i_c"], n_points=p["n_points"]), 4)
    dE = sp.delta_E
    t = np.linspace(0, p["periods"] * 2 * math.pi / dE, p["n_times"])
    closed = squid.tunneling_probability(dE, t)
    if p["model"] == "full":
        if p["gamma_ratio"] != 0:
            raise ConfigError("gamma_ratio: the full flux-grid evolution is closed; use model=two-level")
        states = squid.evolve_full(sp, sp.L_state, t)
        p_L = np.array([abs(np.vdot(sp.L_state.amplitudes, s.amplitudes)) ** 2 for s in states])
        coh = np.full(t.size, math.nan)
    else:
        traj = squid.evolve_two_level(dE, squid.DephasingModel(p["gamma_ratio"] * dE),
                                      DensityMatrix(np.diag([1.0, 0.0])), t)
        p_L, coh = traj.p_L, traj.coherence()
    summary = {"delta_E": dE, "gamma": p["gamma_ratio"] * dE,
               "max_abs_dev_from_closed_form": float(np.max(np.abs(p_L - closed)))}
    return ResultEnvelope(cfg, {"t": t, "p_L": p_L, "p_L_closed_form": closed, "coherence_LR": coh}, summary)


def _cmd_squid_wigner(cfg: RunConfig) -> ResultEnvelope:
    p = cfg.parameters
    sp = squid.solve_spectrum(squid.SquidParams(C=p["C"], i_c=p["i_c"], n_points=p["n_points"]), 4)
    gamma = p["gamma_ratio"] * sp.delta_E
    if gamma == 0:
        raise ConfigError("gamma_ratio: must be positive for a dephasing run")
    gt = np.linspace(0, p["gamma_t_max"], p["n_snapshots"])
    traj = squid.evolve_two_level(sp.delta_E, squid.DephasingModel(gamma),
                                  DensityMatrix(np.full((2, 2), 0.5)), gt / gamma)
    grid = squid.default_wigner_grid(sp, nx=p["nx"], np_=p["np"])
    snaps = squid.wigner_snapshots(sp, traj, grid)
    cols = {"gamma_t": [], "phi": [], "p": [], "W": []}
    summary = {"delta_E": sp.delta_E, "gamma": gamma}
    for i, (g, w) in enumerate(zip(gt, snaps)):
        xx, pp = np.meshgrid(w.x, w.p, indexing="ij")
        cols["gamma_t"].append(np.full(xx.size, g))
        cols["phi"].append(xx.ravel())
        cols["p"].append(pp.ravel())
        cols["W"].append(w.values.ravel())
        summary[f"snapshot_{i}_normalization"] = w.total()
        summary[f"snapshot_{i}_interference_ratio"] = squid.interference_ratio(sp, w)
        summary[f"snapshot_{i}_min_W"] = float(w.values.min())
    return ResultEnvelope(cfg, {k: np.concatenate(v) for k, v in cols.items()}, summary)


def _cmd_talbot_scan(cfg: RunConfig) -> ResultEnvelope:
    p = cfg.parameters
    beam = matterwave.BeamParams.from_amu(p["mass_amu"], p["velocity"])
    stack = matterwave.GratingStack(d=p["d"], open_fraction=p["open_fraction"], L=p["L"] or None,
                                    n_slits=p["n_slits"])
    inc = matterwave.Incoherence(p["n_angles"], p["angular_spread"] or None)
    scan = matterwave.simulate_fringe_scan(beam, stack, p["n_scan"], inc, p["points_per_period"], p["model"])
    summary = {"lambda_dB": beam.lambda_dB, "talbot_length": matterwave.talbot_length(p["d"], beam.lambda_dB),
               "L": scan.separation, "visibility": scan.visibility, "dominant_period": scan.period}
    return ResultEnvelope(cfg, {"shift": scan.shifts, "counts": scan.counts}, summary)


def _cmd_talbot_visibility(cfg: RunConfig) -> ResultEnvelope:
    p = cfg.parameters
    env = matterwave.GasEnvironment(temperature=p["temperature"], sigma_eff=p["sigma_eff"])
    p0 = matterwave.decoherence_pressure(env, p["L"])
    pressures = np.linspace(0, p["p_max_ratio"] * p0, p["n_points"])
    V = matterwave.visibility_with_gas(p["V0"], pressures, p0)
    summary = {"p0": p0}
    if p["target_mass_amu"] > 0:
        ex = matterwave.extrapolate_required_pressure(p["target_mass_amu"], p["reference_mass_amu"], p0)
        summary.update({"extrapolated_p0": ex["p0"], "extrapolated_p0_ratio": ex["p0_ratio"],
                        "extrapolation_assumptions": "; ".join(ex["assumptions"])})
    ratio = np.exp(-pressures / p0)
    return ResultEnvelope(cfg, {"p": pressures, "p_over_p0": pressures / p0, "V": V, "V_over_V0": ratio}, summary)


def _cmd_bec_cat(cfg: RunConfig) -> ResultEnvelope:
    p = cfg.parameters
    N, n = p["N"], p["n"]
    if 2 * n > N:
        raise ConfigError(f"n: {n} exceeds N/2 = {N / 2:g}")
    cat = bec.make_cat(N, n, p["phi"])
    damping = bec.PhaseDampingParams(p["kappa"], p["omega"])
    t = np.linspace(0, p["t_max"], p["n_times"])
    coh, purity = [], []
    for ti in t:
        rho = bec.phase_damp(cat, damping, ti)
        coh.append(abs(rho.entries[n, N - n]))
        purity.append(rho.purity())
    summary = {"N": N, "n": n}
    if p["kappa"] > 0 and 2 * n != N:
        summary["coherence_half_life"] = math.log(2) / ((N - 2 * n) ** 2 * p["kappa"])
    if p["loss_mode"]:
        loss = bec.annihilate(cat, p["loss_mode"])
        summary["loss_norm"] = loss.norm
        summary["loss_annihilated"] = loss.annihilated
        if loss.state is not None:
            summary["loss_post_purity"] = loss.state.density().purity()
            nz = np.flatnonzero(np.abs(loss.state.amplitudes) > 1e-15)
            summary["loss_post_support"] = ";".join(f"|{k},{loss.state.N - k}>" for k in nz)
    return ResultEnvelope(cfg, {"t": t, "coherence": np.array(coh), "purity": np.array(purity)}, summary)


def _cmd_bec_tau(cfg: RunConfig) -> ResultEnvelope:
    p = cfg.parameters
    cal = bec.calibrate_tau(p["a"], p["ref_N_nc"], p["ref_N"], p["ref_tau"])
    tau = cal.predict(p["N_nc"], p["N"])
    Ns = np.geomspace(p["ref_N"], p["N"], p["n_points"])
    check = bec.CondensationCheck(p["mass_amu"] * CONSTANTS.amu, p["temperature"], p["density"])
    regime = bec.condensation_regime(check)
    summary = {"c": cal.c, "tau_d": tau, "quoted_tau": p["quoted_tau"],
               "orders_from_quoted": abs(math.log10(tau / p["quoted_tau"])),
               "lambda_dB_thermal": regime["lambda_dB_thermal"], "interparticle": regime["interparticle"],
               "degeneracy_ratio": regime["ratio"], "condensed_hint": regime["condensed_hint"]}
    return ResultEnvelope(cfg, {"N": Ns, "tau_d": np.array([cal.predict(p["N_nc"], x) for x in Ns])}, summary)


def _split_list(text: str) -> list[str]:
    return [s.strip() for s in text.split(",") if s.strip()]


def _cmd_envariance(cfg: RunConfig) -> ResultEnvelope:
    p = cfg.parameters
    try:
        weights = [Fraction(w) for w in _split_list(p["weights"])]
        phases = [float(x) for x in _split_list(p["phases"])] or [0.0] * len(weights)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"weights: cannot parse {p['weights']!r} / phases {p['phases']!r}") from None
    if len(phases) != len(weights) or len(weights) < 2:
        raise ConfigError("weights: need at least two weights and one phase per weight")
    if sum(weights) != 1:
        raise ConfigError("weights: must sum to exactly 1")
    fg = relstate.fine_grain(weights)
    summary = {"denominator": fg.denominator}
    if len(set(weights)) == 1:
        state = relstate.schmidt_state([float(w) for w in weights], phases)
        probs = relstate.envariant_probabilities(state)
        summary["route"] = "envariance"
    else:
        probs = fg.probabilities
        summary["route"] = "fine-grained envariance"
    summary["probabilities"] = ";".join(str(q) for q in probs)
    return ResultEnvelope(cfg, {"branch": np.arange(len(weights)), "weight": [float(w) for w in weights],
                                "sub_branches": fg.counts, "probability": [float(q) for q in probs]}, summary)


def _cmd_darwinism(cfg: RunConfig) -> ResultEnvelope:
    p = cfg.parameters
    r0, r1 = relstate.record_state(p["overlap"])
    perfect = [np.array([1.0, 0.0]), np.array([0.0, 1.0])]
    records = [[r0, r1]] * p["n_fragments"] + [perfect] * p["hidden_fragments"]
    state = relstate.branching_state([p["p0"], 1 - p["p0"]], records)
    prof = relstate.redundancy_profile(state, seed=cfg.seed, accessible=range(p["n_fragments"]))
    return ResultEnvelope(cfg, {"fragment_size": prof.fragment_sizes, "mutual_information": prof.mutual_information,
                                "deficit": prof.deficit, "subsets": prof.subsets_used},
                          {"system_entropy": prof.system_entropy})


def _cmd_chain(cfg: RunConfig) -> ResultEnvelope:
    p = cfg.parameters
    stages = ["object", "photon", "rhodopsin", "neurons"]
    eps = [1.0, p["eps_P"], p["eps_R"], p["eps_N"]]
    coh = []
    for k in range(len(stages)):
        e = [eps[i] if i <= k else 1.0 for i in range(1, 4)]
        coh.append(relstate.object_coherence(relstate.build_chain(*e)))
    summary = {"object_coherence": coh[-1], "overlap_product_half": 0.5 * p["eps_P"] * p["eps_R"] * p["eps_N"],
               "neuron_coherence": relstate.neuron_dephase_estimate(1 / p["neuron_tau"], p["neuron_t"])}
    return ResultEnvelope(cfg, {"stage": np.arange(len(stages)), "object_coherence": np.array(coh)}, summary)


def _cmd_macro_table(cfg: RunConfig) -> ResultEnvelope:
    cat = macrometer.builtin_catalog()
    series = {
        "name": [r.name for r in cat], "s_ext": [r.s_ext for r in cat], "s_ent": [r.s_ent for r in cat],
        "product": [r.product for r in cat], "status": [r.experimental_status for r in cat],
        "basis": [r.s_ext_basis for r in cat], "notes": [r.notes for r in cat],
    }
    summary = {"log10_squid_over_c70": macrometer.orders_between(cat[0], cat[1])}
    return ResultEnvelope(cfg, series, summary)


COMMANDS: dict[str, Callable[[RunConfig], ResultEnvelope]] = {
    "squid-spectrum": _cmd_squid_spectrum,
    "squid-tunnel": _cmd_squid_tunnel,
    "squid-wigner": _cmd_squid_wigner,
    "talbot-scan": _cmd_talbot_scan,
    "talbot-visibility": _cmd_talbot_visibility,
    "bec-cat": _cmd_bec_cat,
    "bec-tau": _cmd_bec_tau,
    "envariance": _cmd_envariance,
    "darwinism": _cmd_darwinism,
    "chain": _cmd_chain,
    "macro-table": _cmd_macro_table,
}


# --- serialization --------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        return f"{v:.15e}"
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return None if math.isnan(v) else float(f"{v:.15e}")
    return v


def render(env: ResultEnvelope) -> str:
    header = {"tool": "qmacro", "tool_version": env.tool_version, "config": env.config.echo()}
    if env.config.format == "json":
        doc = {**header, "summary": env.summary, "series": env.series}
        return json.dumps(_jsonable(doc), sort_keys=True, indent=1) + "\n"
    import csv
    import io

    buf = io.StringIO()
    buf.write(f"# {json.dumps(_jsonable(header), sort_keys=True)}\n")
    for k in sorted(env.summary):
        buf.write(f"# summary {k} = {_fmt(env.summary[k])}\n")
    names = list(env.series)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names)
    cols = [env.series[n] for n in names]
    for row in zip(*cols):
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def write_atomic(path: str, text: str) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run(config: RunConfig) -> ResultEnvelope:
    env = COMMANDS[config.command](config)
    if config.output_path:
        write_atomic(config.output_path, render(env))
    return env


# --- entry point ----------------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qmacro", description=__doc__.split("\n\n")[0])
    ap.add_argument("--version", action="version", version=f"qmacro {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in (*COMMANDS, "validate"):
        sp = sub.add_parser(name)
        if name == "validate":
            sp.add_argument("config")
            sp.add_argument("--command", dest="target", choices=sorted(COMMANDS))
        else:
            sp.add_argument("--config")
            sp.add_argument("--out")
            sp.add_argument("--format", choices=("csv", "json"))
            sp.add_argument("--seed", type=int)
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "validate":
            values = _read_config_file(args.config)
            cfg = resolve(args.target, values, _parse_sets(args.set))
            print(f"ok: {cfg.command} with {len(cfg.parameters)} parameters")
            return EXIT_OK
        cfg = resolve(args.command, _read_config_file(args.config), _parse_sets(args.set),
                      args.format, args.seed, args.out)
        env = run(cfg)
        if not cfg.output_path:
            sys.stdout.write(render(env))
        return EXIT_OK
    except ArgumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericError, QMacroError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
