"""``povm-prep``: config-driven front end.

    povm-prep <validate|prepare|sweep|generate|repeat|oracle> --config <path|-> [--out <path>] [--format csv|json]

Exit status: 0 success, 1 config error, 2 domain infeasibility, 3 numerical
failure. Warnings go to stderr and, for JSON output, into the envelope.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

from . import __version__
from .basis import (
    EulerAngles,
    MeasurementSet,
    PhiVector,
    StateVector,
    gram_diagonality_residual,
    phi_angle_diagnostics,
    phi_from_angles,
    psi_from_angles,
    resolution_residual,
)
from .config import (
    COMMANDS,
    Angle,
    Case1Block,
    Case2Block,
    Case3Block,
    EqualOverlapCase1Block,
    EqualOverlapCase2Block,
    ExplicitBlock,
    RunConfig,
    TemperatureRange,
    parse_config,
    pi_units,
)
from .emit import sweep_csv, to_json
from .errors import (
    ConfigError,
    Diagnostic,
    DomainError,
    GramNotDiagonal,
    PovmPrepError,
    SingularOverlap,
    ZeroDenominator,
)
from .preparation import ThermalParams, a_factor, initial_coherence_formula, reduced_density
from .purity import (
    Feasibility,
    OverlapMatrix,
    brute_force_min,
    extremal_probabilities,
    kT_grid,
    max_self_consistent_kT,
    overlap_matrix,
    self_consistent_thetas,
    temperature_sweep,
)
from .repeated import RepeatedScheme, evaluate_scheme, srm_vectors
from .settings import (
    Branch,
    Case1Params,
    Case2Branch,
    Case2Params,
    Case3Params,
    PhiSetting,
    case3_setting,
    equal_overlap_case1_family,
    equal_overlap_case2_family,
    generate_case1,
    generate_case2,
    generate_case3,
    psi_azimuths,
    self_consistent_set,
)

THREADS_ENV = "POVM_PREP_THREADS"
RESOLUTION_TOL = 1e-10


@dataclass
class Result:
    records: Any
    diagnostics: list[dict[str, str]] = field(default_factory=list)
    status: int = 0
    csv_rows: list[tuple] | None = None

    def warn(self, code: Diagnostic | str, message: str) -> None:
        entry = {"code": getattr(code, "value", code), "message": message}
        if entry not in self.diagnostics:
            self.diagnostics.append(entry)


def _threads() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw == "":
        return 1
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n < 1:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


def _angles_pi(a: EulerAngles) -> dict[str, float]:
    return {"theta": a.theta / math.pi, "phi": a.phi / math.pi}


def _to_angles(items: Sequence[Angle]) -> tuple[EulerAngles, ...]:
    return tuple(EulerAngles(pi_units(a.theta), pi_units(a.phi)) for a in items)


def _case3_params(b: Case3Block) -> Case3Params:
    return Case3Params(pi_units(b.theta_b1), pi_units(b.delta12), pi_units(b.delta13),
                       (Branch(b.branch[0]), Branch(b.branch[1])))


def phi_settings(cfg: RunConfig, all_branches: bool = False) -> list[PhiSetting]:
    """Phi settings named by the angle block; several only for case 3 with ``all_branches``."""
    b = cfg.angles
    if b is None:
        raise ConfigError("angles: required for this command")
    if isinstance(b, ExplicitBlock):
        angles = _to_angles(b.phi)
        return [PhiSetting("explicit", angles, tuple(phi_angle_diagnostics(angles)))]
    if isinstance(b, Case1Block):
        return [generate_case1(Case1Params(pi_units(b.theta_b1), pi_units(b.theta_b2), b.k, b.l,
                                           pi_units(b.phi_b3_gauge), Branch(b.theta_b3_branch)))]
    if isinstance(b, Case2Block):
        return [generate_case2(Case2Params(pi_units(b.theta_b1), b.k, Case2Branch(b.branch)))]
    if isinstance(b, Case3Block):
        p = _case3_params(b)
        if all_branches:
            return list(generate_case3(p))
        return [case3_setting(p)]
    if isinstance(b, EqualOverlapCase1Block):
        return [equal_overlap_case1_family(pi_units(b.theta_b3), b.variant)]
    if isinstance(b, EqualOverlapCase2Block):
        return [equal_overlap_case2_family(b.k, Case2Branch(b.branch))]
    raise ConfigError("angles: unknown block")  # pragma: no cover


def _check_n(cfg: RunConfig, n: int) -> None:
    if cfg.n_outcomes is not None and cfg.n_outcomes != n:
        raise ConfigError(f"n_outcomes: {cfg.n_outcomes} does not match the {n} phi vectors")


def _single_setting(cfg: RunConfig, res: Result) -> PhiSetting:
    s = phi_settings(cfg)[0]
    _check_n(cfg, len(s.angles))
    for d in s.diagnostics:
        res.warn(d, f"{s.case} setting: {d.value}")
    return s


def _scalar_temperature(cfg: RunConfig, name: str = "temperature") -> ThermalParams:
    if not isinstance(cfg.temperature, (int, float)):
        raise ConfigError(f"{name}: a single k_B T/omega0 value is required for this command")
    return ThermalParams.from_kT(float(cfg.temperature))


def _t_star(cfg: RunConfig, omega_ext: Sequence[float], default: ThermalParams | None) -> ThermalParams:
    if cfg.t_star is None:
        if default is None:
            raise ConfigError("t_star: required for this command")
        return default
    if cfg.t_star == "boundary":
        kt = max_self_consistent_kT(omega_ext)
        if math.isinf(kt):
            raise DomainError("t_star: every temperature is self-consistent here, 'boundary' is undefined")
        return ThermalParams.from_kT(kt)
    return ThermalParams.from_kT(float(cfg.t_star))


def _measurement_set(cfg: RunConfig, setting: PhiSetting, default_t: ThermalParams | None) -> MeasurementSet:
    phi = setting.vectors()
    n = len(phi)
    if cfg.psi is None:
        raise ConfigError("psi: required for this command (a list of angles or 'self_consistent')")
    if cfg.psi == "self_consistent":
        ext = setting.extremal()
        return self_consistent_set(phi, _t_star(cfg, ext.omega_ext, default_t))
    if len(cfg.psi) != n:
        raise ConfigError(f"psi: expected {n} entries, got {len(cfg.psi)}")
    return MeasurementSet(n, tuple(psi_from_angles(a, n) for a in _to_angles(cfg.psi)), phi)


def _extremal_record(ext) -> dict[str, Any]:
    return {"omega_ext": list(ext.omega_ext), "p_min": ext.p_min, "feasible": ext.feasible,
            "reason": ext.reason.value}


def cmd_validate(cfg: RunConfig) -> Result:
    res = Result({})
    s = _single_setting(cfg, res)
    phi = s.vectors()
    rec: dict[str, Any] = {
        "n_outcomes": len(phi),
        "phi_norm2": [v.norm2() for v in phi],
        "gram_residual": gram_diagonality_residual(phi),
        "gram_diagonal": gram_diagonality_residual(phi) < 1e-10,
    }
    if cfg.psi is not None:
        if cfg.psi == "self_consistent":
            t = _scalar_temperature(cfg) if cfg.temperature is not None else None
            psi = _measurement_set(cfg, s, t).psi
        else:
            if len(cfg.psi) != len(phi):
                raise ConfigError(f"psi: expected {len(phi)} entries, got {len(cfg.psi)}")
            psi = tuple(psi_from_angles(a, len(phi)) for a in _to_angles(cfg.psi))
        r = resolution_residual(psi)
        rec["psi_norm2"] = [p.norm2() for p in psi]
        rec["resolution_residual"] = r
        rec["valid"] = r <= RESOLUTION_TOL
        if r > RESOLUTION_TOL:
            res.warn("InvalidSet", f"effects do not resolve the identity (residual {r:.3e})")
            res.status = DomainError.exit_status
    res.records = rec
    return res


def cmd_prepare(cfg: RunConfig) -> Result:
    res = Result({})
    s = _single_setting(cfg, res)
    t = _scalar_temperature(cfg)
    mset = _measurement_set(cfg, s, t)
    st = reduced_density(mset, t)
    rho = st.rho.m
    rec: dict[str, Any] = {
        "kT_over_omega0": t.kT_over_omega0,
        "omega": list(st.probabilities),
        "purity": st.purity,
        "coherence": {"re": st.coherence.real, "im": st.coherence.imag, "abs": abs(st.coherence)},
        "rho": [[{"re": rho[i, j].real, "im": rho[i, j].imag} for j in range(2)] for i in range(2)],
        "eigenvalues": list(st.rho.eigenvalues()),
        "gram_residual": gram_diagonality_residual(mset),
        "resolution_residual": mset.residual,
        "extremal": _extremal_record(s.extremal()),
    }
    try:
        a = a_factor(mset, t)
        rec["a_factor"] = {"re": a.real, "im": a.imag}
    except ZeroDenominator as exc:
        rec["a_factor"] = None
        res.warn(exc.code, str(exc))
    try:
        c = initial_coherence_formula(mset, t)
        rec["coherence_formula"] = {"re": c.real, "im": c.imag}
    except GramNotDiagonal:
        rec["coherence_formula"] = None
    res.records = rec
    return res


def cmd_sweep(cfg: RunConfig) -> Result:
    res = Result([])
    s = _single_setting(cfg, res)
    if cfg.psi not in (None, "self_consistent"):
        raise ConfigError("psi: sweeps always use self-consistent psi vectors")
    if isinstance(cfg.temperature, (int, float)):
        raise ConfigError("temperature: sweeps need a range {min, max, points}")
    rng = cfg.temperature or TemperatureRange()
    ext = s.extremal()
    if ext.reason is Feasibility.SINGULAR_OVERLAP:
        raise SingularOverlap("overlap matrix of the phi vectors is singular")
    if not ext.feasible:
        res.warn(Diagnostic.NO_GLOBAL_MINIMUM, "extremal probabilities leave the simplex")
    t_star = _t_star(cfg, ext.omega_ext, None)
    try:
        psi_azimuths(self_consistent_thetas(ext.omega_ext, t_star))
    except PovmPrepError as exc:
        if exc.code != "InvalidSet":
            raise
        res.warn(Diagnostic.INCOMPLETE_RESOLUTION,
                 f"no psi azimuths resolve the identity at T*: {exc}; sweep uses the polar angles only")
    grid = kT_grid(rng.min, rng.max, rng.points)
    recs = temperature_sweep(s.vectors(), t_star, grid, workers=_threads())
    best = min(range(len(recs)), key=lambda i: recs[i].purity)
    res.records = [{
        "kT_over_omega0": r.kT_over_omega0, "purity": r.purity, "p_min": r.p_min,
        "coherence_abs": r.coherence_abs, "is_minimum": i == best, "omega": list(r.probabilities),
    } for i, r in enumerate(recs)]
    res.csv_rows = [(r.kT_over_omega0, r.purity, r.p_min, r.coherence_abs, int(i == best))
                    for i, r in enumerate(recs)]
    return res


def _generate_record(cfg: RunConfig, s: PhiSetting, res: Result) -> dict[str, Any]:
    ext = s.extremal()
    rec: dict[str, Any] = {
        "case": s.case,
        "branch": list(s.branch),
        "phi": [_angles_pi(a) for a in s.angles],
        "gram_residual": s.gram_residual,
        "extremal": _extremal_record(ext) if ext.p_min is not None else None,
        "diagnostics": [d.value for d in s.diagnostics],
        "psi": None,
        "resolution_residual": None,
        "kT_star": None,
        "max_self_consistent_kT": None,
    }
    for d in s.diagnostics:
        msg = "an extremal probability is 0 or 1" if d is Diagnostic.UNPHYSICAL else d.value
        res.warn(d, f"{s.case} branch {'/'.join(s.branch) or '-'}: {msg}")
    if not ext.feasible:
        res.warn(Diagnostic.NO_GLOBAL_MINIMUM, f"{s.case}: no global minimum on the simplex")
        return rec
    kt_max = max_self_consistent_kT(ext.omega_ext)
    rec["max_self_consistent_kT"] = None if math.isinf(kt_max) else kt_max
    try:
        t_star = _t_star(cfg, ext.omega_ext, ThermalParams.from_kT(0.0))
        mset = self_consistent_set(s.vectors(), t_star)
    except PovmPrepError as exc:
        res.warn(exc.code, f"{s.case} branch {'/'.join(s.branch) or '-'}: psi not emitted: {exc}")
        return rec
    rec["kT_star"] = t_star.kT_over_omega0
    rec["psi"] = [_angles_pi(p.angles()) for p in mset.psi]
    rec["resolution_residual"] = mset.residual
    return rec


def cmd_generate(cfg: RunConfig) -> Result:
    res = Result([])
    settings = phi_settings(cfg, all_branches=True)
    _check_n(cfg, 3)
    res.records = [_generate_record(cfg, s, res) for s in settings]
    return res


def _primed_vectors(cfg: RunConfig, mset: MeasurementSet, t: ThermalParams, res: Result
                    ) -> tuple[tuple[StateVector, ...], tuple[PhiVector, ...], str]:
    primed = cfg.primed
    if primed is None:
        raise ConfigError("primed: required for repeat")
    n = mset.n_outcomes
    if primed.phi == "same":
        phi2 = mset.phi
    else:
        if len(primed.phi) != n:
            raise ConfigError(f"primed.phi: expected {n} entries, got {len(primed.phi)}")
        phi2 = tuple(phi_from_angles(a) for a in _to_angles(primed.phi))
    if primed.psi == "srm":
        srm = srm_vectors(reduced_density(mset, t), mset.phi)
        for d in srm.diagnostics:
            res.warn(d, "prepared state is rank deficient; generalized inverse used")
        psi2 = srm.vectors
    elif primed.psi == "phi":
        psi2 = tuple(StateVector(v.c1, v.c0) for v in mset.phi)
    else:
        if len(primed.psi) != n:
            raise ConfigError(f"primed.psi: expected {n} entries, got {len(primed.psi)}")
        psi2 = []
        for p in primed.psi:
            u = phi_from_angles(EulerAngles(pi_units(p.theta), pi_units(p.phi)))
            k = math.sqrt(p.norm2)
            psi2.append(StateVector(k * u.c1, k * u.c0))
        psi2 = tuple(psi2)
    kind = primed.psi if isinstance(primed.psi, str) else "explicit"
    return psi2, phi2, kind


def cmd_repeat(cfg: RunConfig) -> Result:
    res = Result({})
    s = _single_setting(cfg, res)
    t = _scalar_temperature(cfg)
    mset = _measurement_set(cfg, s, t)
    psi2, phi2, kind = _primed_vectors(cfg, mset, t, res)
    report = evaluate_scheme(RepeatedScheme(mset, t, psi2, phi2))
    for d in report.diagnostics:
        msg = {
            Diagnostic.USELESS_REPEAT: "state unchanged: the repeated measurement is useless for purification",
            Diagnostic.NO_GLOBAL_MINIMUM: "extremum shift not evaluated: singular overlap or transfer matrix",
        }.get(d, d.value)
        res.warn(d, msg)
    ext2 = extremal_probabilities(overlap_matrix(phi2))
    shift = report.shift
    res.records = {
        "primed_psi": kind,
        "omega": list(report.omega),
        "omega_tilde": list(report.omega_tilde),
        "purity": report.purity,
        "purity_prime": report.purity_prime,
        "p_min_prime": ext2.p_min if ext2.feasible else None,
        "squared_error": report.squared_error,
        "squared_error_scaled": report.squared_error_scaled,
        "transfer": [[float(x) for x in row] for row in report.transfer.d2.tolist()],
        "extremum_shift": None if shift is None else {
            "lhs": list(shift.lhs), "rhs": list(shift.rhs), "violated": list(shift.violated)},
    }
    return res


def cmd_oracle(cfg: RunConfig) -> Result:
    res = Result({})
    if cfg.overlap is not None:
        if cfg.angles is not None:
            raise ConfigError("oracle: give either angles or overlap, not both")
        try:
            c = OverlapMatrix.from_rows(cfg.overlap)
        except ValueError as exc:
            raise ConfigError(f"overlap: {exc}") from None
    else:
        s = _single_setting(cfg, res)
        c = overlap_matrix(s.vectors())
    _check_n(cfg, c.n)
    w_grid, v_grid = brute_force_min(c, cfg.oracle_grid_step)
    ext = extremal_probabilities(c)
    rec: dict[str, Any] = {
        "grid_step": cfg.oracle_grid_step,
        "grid_minimizer": list(w_grid),
        "grid_minimum": v_grid,
        "omega_ext": list(ext.omega_ext),
        "p_min": ext.p_min,
        "feasible": ext.feasible,
        "reason": ext.reason.value,
        "value_delta": None,
        "omega_delta": None,
    }
    if ext.feasible:
        rec["value_delta"] = v_grid - ext.p_min
        rec["omega_delta"] = max(abs(a - b) for a, b in zip(w_grid, ext.omega_ext))
    else:
        res.warn(Diagnostic.NO_GLOBAL_MINIMUM, "no global minimum on simplex; grid minimum lies on the boundary")
    res.records = rec
    return res


HANDLERS: dict[str, Callable[[RunConfig], Result]] = {
    "validate": cmd_validate,
    "prepare": cmd_prepare,
    "sweep": cmd_sweep,
    "generate": cmd_generate,
    "repeat": cmd_repeat,
    "oracle": cmd_oracle,
}


def render(command: str, cfg: RunConfig, res: Result, fmt: str) -> str:
    if fmt == "csv":
        return sweep_csv(res.csv_rows or [])
    return to_json({
        "version": __version__,
        "command": command,
        "config_echo": cfg.model_dump(mode="json", exclude_none=True),
        "records": res.records,
        "diagnostics": res.diagnostics,
    })


def run(command: str, config_text: str, out: str | None = None,
        fmt: str | None = None) -> tuple[int, str, str | None]:
    """Run one command on a config text.

    Returns the exit status, the rendered output and the path it was written
    to (``out``, else the config's ``output_path``, else None).
    """
    cfg = parse_config(config_text)
    if cfg.command is not None and cfg.command != command:
        raise ConfigError(f"command: config is for {cfg.command!r}, invoked as {command!r}")
    fmt = fmt or cfg.output_format or ("csv" if command == "sweep" else "json")
    if fmt == "csv" and command != "sweep":
        raise ConfigError("output_format: csv is only available for sweep")
    res = HANDLERS[command](cfg)
    text = render(command, cfg, res, fmt)
    for d in res.diagnostics:
        print(f"warning[{d['code']}]: {d['message']}", file=sys.stderr)
    path = out or cfg.output_path
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return res.status, text, path


def _read_config(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc.strerror}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="povm-prep",
                                description="Qubit state preparation by nonselective measurements.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="JSON config path, or - for stdin")
    p.add_argument("--out", help="write the result here instead of stdout")
    p.add_argument("--format", choices=("csv", "json"), dest="fmt")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        status, text, path = run(args.command, _read_config(args.config), args.out, args.fmt)
    except PovmPrepError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return exc.exit_status
    if path is None:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
