"""``thermo`` command-line front end: configuration, sweeps and CSV output.

Configuration is a flat ``key = value`` file (an optional ``[thermo]``
section header is accepted); command-line flags override file values,
which override the built-in defaults taken from the reference parameter set
(omega_z = 4.8e6, omega_R = 3e9, phi = 0, g0 = 1e-8, theta = pi/4).
"""

from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import io
import math
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Callable, Optional, Sequence, Union

import numpy as np

from weakthermo.errors import (
    ConfigError,
    ConvergenceError,
    InsensitivePostselectionError,
    OrthogonalPostselectionError,
)
from weakthermo.linalg import FockSpace
from weakthermo.metrology import NO_INFORMATION, cramer_rao, qfi_analytic, run_replicate
from weakthermo.pointer import (
    CouplingParams,
    evolve_exact,
    gaussian_ground_state,
    infidelity,
    pointer_readouts,
    postselect_pointer,
    weak_final_state,
)
from weakthermo.spin import PostselectionAngles, SpinParams, build_spin_hamiltonian, gibbs_state, postselect_state
from weakthermo.weak import inversion_coefficients, invert_beta, weak_value_exact, weak_value_first_order

COMMANDS = ("weak-value", "invert-beta", "pointer", "qfi-sweep", "experiment")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DEGENERATE = 3

EXPERIMENT_G0 = 0.05


@dataclass(frozen=True)
class RunConfig:
    command: str = "qfi-sweep"
    omega_z: float = 4.8e6
    omega_r: float = 3e9
    g0: Optional[float] = None  # resolved per command
    sigma: float = 1.0
    t: float = 1.0
    include_free_evolution: bool = False
    omega_c: float = 0.0
    theta: float = math.pi / 4
    phi: float = 0.0
    theta_min: float = 0.0
    theta_max: float = math.pi
    theta_steps: int = 1
    phi_min: float = 0.0
    phi_max: float = 2 * math.pi
    phi_steps: int = 1
    beta: float = 1e-11
    beta_min: float = 1e-12
    beta_max: float = 3.3e-11
    beta_steps: int = 20
    log_beta: bool = False
    fock_dim: int = 32
    seed: int = 0
    n_samples: int = 10_000
    replicates: int = 100
    sw_re: Optional[float] = None
    sw_im: Optional[float] = None
    workers: int = 1
    out: Optional[str] = None

    @property
    def spin(self) -> SpinParams:
        return SpinParams(self.omega_z, self.omega_r)

    @property
    def coupling(self) -> CouplingParams:
        return CouplingParams(self.g0, self.sigma, self.t, self.include_free_evolution, self.omega_c)

    @property
    def angles(self) -> PostselectionAngles:
        return PostselectionAngles(self.theta, self.phi)

    def theta_grid(self) -> np.ndarray:
        if self.theta_steps == 1:
            return np.array([self.theta])
        return np.linspace(self.theta_min, self.theta_max, self.theta_steps)

    def phi_grid(self) -> np.ndarray:
        # half-open: phi is periodic
        if self.phi_steps == 1:
            return np.array([self.phi])
        k = np.arange(self.phi_steps)
        return self.phi_min + (self.phi_max - self.phi_min) * k / self.phi_steps

    def beta_grid(self) -> np.ndarray:
        if self.beta_steps == 1:
            return np.array([self.beta_min])
        if self.log_beta:
            return np.geomspace(self.beta_min, self.beta_max, self.beta_steps)
        return np.linspace(self.beta_min, self.beta_max, self.beta_steps)


# keys that are not configuration values
_NOT_CONFIG = {"command", "out", "workers"}
_NOT_ECHOED = {"command", "out", "workers"}


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_int(text: str) -> int:
    return int(text.strip())


_CONVERTERS: dict[str, Callable[[str], Any]] = {}
for _f in fields(RunConfig):
    if _f.name in _NOT_CONFIG:
        continue
    if _f.type in ("bool",):
        _CONVERTERS[_f.name] = _parse_bool
    elif _f.type in ("int",):
        _CONVERTERS[_f.name] = _parse_int
    else:
        _CONVERTERS[_f.name] = float


def _normalize_key(key: str) -> str:
    return key.strip().lower().replace("-", "_")


def read_config_file(path: Union[str, Path]) -> dict[str, Any]:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    text = path.read_text(encoding="utf-8")
    if not re.search(r"^\s*\[", text, flags=re.MULTILINE):
        text = "[thermo]\n" + text
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    values: dict[str, Any] = {}
    for section in parser.sections():
        if section != "thermo":
            raise ConfigError(f"unknown config section [{section}] in {path}")
        for key, raw in parser.items(section):
            name = _normalize_key(key)
            if name not in _CONVERTERS:
                raise ConfigError(f"unknown config key {key!r} in {path}")
            try:
                values[name] = _CONVERTERS[name](raw)
            except ValueError as exc:
                raise ConfigError(f"bad value for {key!r}: {raw!r} ({exc})") from exc
    return values


def validate(cfg: RunConfig) -> None:
    def need(cond, msg):
        if not cond:
            raise ConfigError(msg)

    need(cfg.command in COMMANDS, f"unknown command {cfg.command!r}")
    for name in ("omega_z", "omega_r", "g0", "sigma", "t", "omega_c", "beta", "beta_min", "beta_max"):
        need(math.isfinite(getattr(cfg, name)), f"{name} must be finite")
    need(cfg.g0 >= 0, "g0 must be >= 0")
    need(cfg.sigma > 0, "sigma must be > 0")
    need(cfg.t > 0, "t must be > 0")
    need(0.0 <= cfg.theta <= math.pi, f"theta = {cfg.theta!r} outside [0, pi]")
    need(0.0 <= cfg.phi < 2 * math.pi, f"phi = {cfg.phi!r} outside [0, 2 pi)")
    need(0.0 <= cfg.theta_min <= cfg.theta_max <= math.pi, "theta range must satisfy 0 <= theta_min <= theta_max <= pi")
    need(0.0 <= cfg.phi_min <= cfg.phi_max <= 2 * math.pi, "phi range must satisfy 0 <= phi_min <= phi_max <= 2 pi")
    for name in ("theta_steps", "phi_steps", "beta_steps"):
        need(getattr(cfg, name) >= 1, f"{name} must be >= 1")
    need(cfg.beta >= 0, "beta must be >= 0")
    need(0.0 <= cfg.beta_min <= cfg.beta_max, "beta range must satisfy 0 <= beta_min <= beta_max")
    need(not (cfg.log_beta and cfg.beta_min <= 0), "log-spaced beta grid needs beta_min > 0")
    need(cfg.fock_dim >= 2, "fock_dim must be >= 2")
    need(cfg.n_samples >= 1000, "n_samples must be >= 1000")
    need(cfg.replicates >= 2, "replicates must be >= 2")
    need(cfg.workers >= 1, "workers must be >= 1")
    need((cfg.sw_re is None) == (cfg.sw_im is None), "sw_re and sw_im must be given together")


def resolve_config(command: str, file_values: Optional[dict] = None, overrides: Optional[dict] = None) -> RunConfig:
    """Merge defaults, file values and flag overrides (in increasing precedence)."""
    merged: dict[str, Any] = {"command": command}
    merged.update(file_values or {})
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
    if merged.get("g0") is None:
        merged["g0"] = EXPERIMENT_G0 if command == "experiment" else 1e-8
    cfg = RunConfig(**merged)
    validate(cfg)
    return cfg


def parse_config(argv: Optional[Sequence[str]] = None) -> RunConfig:
    args = build_parser().parse_args(argv)
    return _config_from_args(args)


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    file_values = read_config_file(args.config) if args.config else {}
    overrides = {
        "omega_z": args.omega_z,
        "omega_r": args.omega_r,
        "g0": args.g0,
        "sigma": args.sigma,
        "theta": args.theta,
        "phi": args.phi,
        "theta_min": args.theta_min,
        "theta_max": args.theta_max,
        "theta_steps": args.theta_steps,
        "phi_min": args.phi_min,
        "phi_max": args.phi_max,
        "phi_steps": args.phi_steps,
        "beta": args.beta,
        "beta_min": args.beta_min,
        "beta_max": args.beta_max,
        "beta_steps": args.beta_steps,
        "log_beta": True if args.log_beta else None,
        "fock_dim": args.fock_dim,
        "seed": args.seed,
        "n_samples": args.n_samples,
        "replicates": args.replicates,
        "sw_re": args.sw_re,
        "sw_im": args.sw_im,
        "workers": args.workers,
        "out": args.out,
    }
    return resolve_config(args.command, file_values, overrides)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="thermo", description="Postselected weak-measurement spin thermometry.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", metavar="PATH")
    ap.add_argument("--omega-z", type=float)
    ap.add_argument("--omega-r", type=float)
    ap.add_argument("--g0", type=float)
    ap.add_argument("--sigma", type=float)
    ap.add_argument("--theta", type=float)
    ap.add_argument("--phi", type=float)
    ap.add_argument("--theta-min", type=float)
    ap.add_argument("--theta-max", type=float)
    ap.add_argument("--theta-steps", type=int)
    ap.add_argument("--phi-min", type=float)
    ap.add_argument("--phi-max", type=float)
    ap.add_argument("--phi-steps", type=int, help="phi grid is half-open [phi_min, phi_max)")
    ap.add_argument("--beta", type=float, help="single-point inverse temperature (experiment: true beta)")
    ap.add_argument("--beta-min", type=float)
    ap.add_argument("--beta-max", type=float)
    ap.add_argument("--beta-steps", type=int)
    ap.add_argument("--log-beta", action="store_true", default=None)
    ap.add_argument("--fock-dim", type=int)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--n-samples", type=int)
    ap.add_argument("--replicates", type=int)
    ap.add_argument("--sw-re", type=float, help="invert-beta: real part of a measured weak value")
    ap.add_argument("--sw-im", type=float)
    ap.add_argument("--workers", type=int)
    ap.add_argument("--out", metavar="PATH")
    return ap


# ---------------------------------------------------------------------------
# CSV


@dataclass(frozen=True)
class SweepRecord:
    theta: float
    phi: float
    beta: float
    temperature: float
    S_w_re: float
    S_w_im: float
    beta_hat: Optional[float]
    qfi: float
    crb: Any
    z_mean: float
    p_mean: float
    postselect_prob: float
    status: str


SWEEP_COLUMNS = [f.name for f in fields(SweepRecord)]


def format_value(v: Any) -> str:
    if v is None:
        return ""
    if v is NO_INFORMATION:
        return str(NO_INFORMATION)
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        # repr is the shortest string that round-trips
        return repr(float(v))
    return str(v)


def _parse_cell(text: str, column: str) -> Any:
    if column == "status":
        return text
    if text == "":
        return None
    if text == str(NO_INFORMATION):
        return NO_INFORMATION
    return float(text)


def write_records(path: Union[str, Path], records: Sequence[Any], columns: Sequence[str]) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for rec in records:
        row = rec if isinstance(rec, dict) else dataclasses.asdict(rec)
        w.writerow([format_value(row[c]) for c in columns])
    Path(path).write_text(buf.getvalue(), encoding="utf-8", newline="")


def read_sweep_csv(path: Union[str, Path]) -> list[SweepRecord]:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != SWEEP_COLUMNS:
        raise ValueError(f"{path}: header does not match the sweep schema")
    return [SweepRecord(**{c: _parse_cell(x, c) for c, x in zip(SWEEP_COLUMNS, row)}) for row in rows[1:]]


def config_echo(cfg: RunConfig) -> str:
    lines = [f"# thermo {cfg.command}", "[thermo]"]
    for f in fields(RunConfig):
        if f.name in _NOT_ECHOED:
            continue
        v = getattr(cfg, f.name)
        if v is None:
            continue
        lines.append(f"{f.name} = {format_value(v)}")
    return "\n".join(lines) + "\n"


def write_config_echo(cfg: RunConfig, out: Union[str, Path]) -> Path:
    path = Path(str(out) + ".config.txt")
    path.write_text(config_echo(cfg), encoding="utf-8", newline="")
    return path


# ---------------------------------------------------------------------------
# commands


def sweep_point(job: tuple) -> SweepRecord:
    theta, phi, beta, spin, coupling = job
    angles = PostselectionAngles(float(theta), float(phi))
    h = build_spin_hamiltonian(spin)
    psi = postselect_state(angles)
    rho = gibbs_state(h, beta)
    prob = float((psi.conj() @ rho @ psi).real)
    temperature = math.inf if beta == 0 else 1.0 / beta
    try:
        sw = weak_value_exact(rho, psi).value
    except OrthogonalPostselectionError:
        return SweepRecord(theta, phi, beta, temperature, None, None, None, 0.0, NO_INFORMATION, None, None, prob, "orthogonal")
    status = "ok"
    try:
        beta_hat = invert_beta(sw, inversion_coefficients(h, psi))
    except InsensitivePostselectionError:
        beta_hat, status = None, "insensitive"
    f = qfi_analytic(beta, angles, coupling, spin)
    ro = pointer_readouts(weak_final_state(sw, coupling, coupling.fock_space(2)), coupling)
    return SweepRecord(
        theta=float(theta),
        phi=float(phi),
        beta=float(beta),
        temperature=temperature,
        S_w_re=sw.real,
        S_w_im=sw.imag,
        beta_hat=beta_hat,
        qfi=f.fisher,
        crb=cramer_rao(f).variance_bound,
        z_mean=ro.z_mean,
        p_mean=ro.p_mean,
        postselect_prob=prob,
        status=status,
    )


def _map(fn, jobs: list, workers: int) -> list:
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map() yields in submission order whatever the completion order
        return list(pool.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def sweep_jobs(cfg: RunConfig) -> list[tuple]:
    spin, coupling = cfg.spin, cfg.coupling
    return [
        (float(th), float(ph), float(b), spin, coupling)
        for th in cfg.theta_grid()
        for ph in cfg.phi_grid()
        for b in cfg.beta_grid()
    ]


def run_qfi_sweep(cfg: RunConfig) -> list[SweepRecord]:
    records = _map(sweep_point, sweep_jobs(cfg), cfg.workers)
    if cfg.out:
        write_records(cfg.out, records, SWEEP_COLUMNS)
        write_config_echo(cfg, cfg.out)
    return records


def sweep_summary(records: Sequence[SweepRecord]) -> str:
    qfi = [r.qfi for r in records]
    bad = sum(r.status != "ok" for r in records)
    return f"qfi-sweep: {len(records)} points, min QFI {min(qfi):.6g}, max QFI {max(qfi):.6g}, {bad} degenerate"


EXPERIMENT_COLUMNS = ["replicate", "beta_hat", "S_w_re", "S_w_im", "z_mean", "p_mean", "status"]


def _experiment_replicate(job: tuple) -> dict:
    sw, coeffs, coupling, n_samples, seed, index = job
    row = dict.fromkeys(EXPERIMENT_COLUMNS)
    row["replicate"] = index
    try:
        z, p, sw_hat, beta_hat = run_replicate(sw, coeffs, coupling, n_samples, seed, index)
    except ConvergenceError:
        row["status"] = "no-convergence"
        return row
    except InsensitivePostselectionError:
        row["status"] = "insensitive"
        return row
    row.update(
        beta_hat=beta_hat,
        S_w_re=sw_hat.real,
        S_w_im=sw_hat.imag,
        z_mean=float(z.mean()),
        p_mean=float(p.mean()),
        status="ok",
    )
    return row


def run_experiment(cfg: RunConfig) -> tuple[list[dict], dict]:
    """Repeated simulated thermometry at ``cfg.beta``; per-replicate rows and a summary."""
    spin, coupling, angles = cfg.spin, cfg.coupling, cfg.angles
    h, psi = build_spin_hamiltonian(spin), postselect_state(angles)
    sw = weak_value_exact(gibbs_state(h, cfg.beta), psi).value
    coeffs = inversion_coefficients(h, psi)
    jobs = [(sw, coeffs, coupling, cfg.n_samples, cfg.seed, r) for r in range(cfg.replicates)]
    rows = _map(_experiment_replicate, jobs, cfg.workers)

    est = np.array([r["beta_hat"] for r in rows if r["status"] == "ok"], dtype=float)
    fisher = qfi_analytic(cfg.beta, angles, coupling, spin)
    n_meas = 2 * cfg.n_samples
    crb = cramer_rao(fisher, n_meas).variance_bound
    summary: dict[str, Any] = {
        "beta_true": cfg.beta,
        "replicates_ok": len(est),
        "replicates_failed": len(rows) - len(est),
        "fisher_per_copy": fisher.fisher,
        "copies_per_replicate": n_meas,
        "crb": crb,
    }
    if len(est) >= 2:
        var = float(est.var(ddof=1))
        summary.update(
            beta_mean=float(est.mean()),
            bias=float(est.mean()) - cfg.beta,
            variance=var,
            variance_stderr=var * math.sqrt(2.0 / (len(est) - 1)),
            variance_over_crb=(var / crb) if crb is not NO_INFORMATION else None,
        )
    if cfg.out:
        write_records(cfg.out, rows, EXPERIMENT_COLUMNS)
        Path(str(cfg.out) + ".summary.txt").write_text(
            "".join(f"{k} = {format_value(v)}\n" for k, v in summary.items()), encoding="utf-8", newline=""
        )
        write_config_echo(cfg, cfg.out)
    return rows, summary


def _single_point(cfg: RunConfig) -> tuple:
    h, psi = build_spin_hamiltonian(cfg.spin), postselect_state(cfg.angles)
    rho = gibbs_state(h, cfg.beta)
    out: dict[str, Any] = {"theta": cfg.theta, "phi": cfg.phi, "beta": cfg.beta}
    sw = weak_value_exact(rho, psi)
    out.update(S_w_exact_re=sw.real, S_w_exact_im=sw.imag)
    try:
        fo = weak_value_first_order(h, psi, cfg.beta)
        out.update(S_w_first_order_re=fo.real, S_w_first_order_im=fo.imag)
    except ValueError:
        out.update(S_w_first_order_re=None, S_w_first_order_im=None)
    out["postselect_prob"] = float((psi.conj() @ rho @ psi).real)
    return out, sw, h, psi


def _emit(values: dict[str, Any], out: Optional[str]) -> None:
    for k, v in values.items():
        print(f"{k}: {format_value(v)}")
    if out:
        write_records(out, [{"quantity": k, "value": v} for k, v in values.items()], ["quantity", "value"])


def cmd_weak_value(cfg: RunConfig) -> int:
    values, *_ = _single_point(cfg)
    _emit(values, cfg.out)
    return EXIT_OK


def cmd_invert_beta(cfg: RunConfig) -> int:
    values, sw, h, psi = _single_point(cfg)
    if cfg.sw_re is not None:
        sw = complex(cfg.sw_re, cfg.sw_im)
        values["S_w_input_re"], values["S_w_input_im"] = sw.real, sw.imag
    try:
        beta_hat, residue = invert_beta(sw, inversion_coefficients(h, psi), full_output=True)
    except InsensitivePostselectionError as exc:
        print(f"thermo: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    values.update(beta_hat=beta_hat, imag_residue=residue)
    _emit(values, cfg.out)
    return EXIT_OK


def cmd_pointer(cfg: RunConfig) -> int:
    values, sw, h, psi = _single_point(cfg)
    c = cfg.coupling
    space = c.fock_space(cfg.fock_dim)
    joint = evolve_exact(gibbs_state(h, cfg.beta), gaussian_ground_state(space), c, spin_hamiltonian=h)
    rho_ptr, prob = postselect_pointer(joint, psi)
    weak = weak_final_state(sw, c, space)
    exact_ro = pointer_readouts(rho_ptr, c)
    weak_ro = pointer_readouts(weak, c)
    values.update(
        exact_postselect_prob=prob,
        infidelity=infidelity(rho_ptr, weak),
        purity=float(np.real(np.trace(rho_ptr @ rho_ptr))),
        z_exact=exact_ro.z_mean,
        p_exact=exact_ro.p_mean,
        z_weak=weak_ro.z_mean,
        p_weak=weak_ro.p_mean,
    )
    _emit(values, cfg.out)
    return EXIT_OK


def cmd_qfi_sweep(cfg: RunConfig) -> int:
    records = run_qfi_sweep(cfg)
    print(sweep_summary(records))
    if cfg.out is None:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for r in records:
            w.writerow([format_value(getattr(r, c)) for c in SWEEP_COLUMNS])
        sys.stdout.write(buf.getvalue())
    if all(r.status != "ok" for r in records):
        return EXIT_DEGENERATE
    return EXIT_OK


def cmd_experiment(cfg: RunConfig) -> int:
    rows, summary = run_experiment(cfg)
    for k, v in summary.items():
        print(f"{k}: {format_value(v)}")
    if summary["replicates_ok"] == 0:
        return EXIT_DEGENERATE
    return EXIT_OK


_DISPATCH = {
    "weak-value": cmd_weak_value,
    "invert-beta": cmd_invert_beta,
    "pointer": cmd_pointer,
    "qfi-sweep": cmd_qfi_sweep,
    "experiment": cmd_experiment,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        cfg = parse_config(argv)
    except ConfigError as exc:
        print(f"thermo: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:  # argparse usage errors
        return EXIT_CONFIG if exc.code else EXIT_OK
    return _DISPATCH[cfg.command](cfg)


if __name__ == "__main__":
    sys.exit(main())
