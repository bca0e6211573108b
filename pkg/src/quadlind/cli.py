"""Command line front end: ``quadlind <subcommand> --config path [--out dir]``.

Subcommands and their outputs (all written to ``--out``, default ``.``):

``diagonalize``  ``spectrum.csv`` (k, omega), ``bogoliubov.csv`` (i, k, ReA, ImA, ReB, ImB),
                 ``diagonalize.json`` (residuals, classification)
``build``        ``effective_model.json``
``dynamics``     ``theta.csv`` (t, k, q, Re, Im), ``correlations.csv`` (t, i, j, ReC, ImC, ReF, ImF)
``steady``       ``steady_theta.csv`` (k, q, Re, Im), ``steady_correlations.csv``
                 (i, j, ReC, ImC, ReF, ImF), ``density_density.csv`` (i, j, G)
``transport``    ``transport.json``
``onsager``      ``onsager.json``
``sweep``        ``sweep.csv`` (T_L, T_R, mu_L, mu_R, J_N, J_NQ, J_E, J_Q)
``oracle``       ``oracle_theta.csv``, ``oracle_correlations.csv``, ``oracle_steady.json`` and,
                 when the closed forms apply, ``comparison.csv`` (t, max_abs_theta, max_abs_C, max_abs_F)
``compare``      ``compare.json``: closed-form steady state and currents against the oracle

Every file starts with a header (tool version, SHA-256 of the config text,
tolerances): ``#`` comment lines in CSV files, a ``header`` object in JSON.
Exit codes: 0 success, 2 configuration error, 3 physics error, 4 capability
error, 5 numerical failure. ``QUADLIND_THREADS`` caps the sweep worker pool.
"""
from __future__ import annotations

import argparse
import itertools
import json
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from . import dynamics as dyn
from . import oracle as orc
from . import transport as tr
from .bogoliubov import classify_spectrum, diagonalize, reconstruct_residual, verify_canonical
from .config import ExperimentConfig, load_config, parse_matrix
from .errors import CapabilityError, ConfigurationError, QuadlindError
from .lindblad_builder import EffectiveModel, build_effective_model

SUBCOMMANDS = ("diagonalize", "build", "dynamics", "steady", "transport", "onsager", "sweep", "oracle", "compare")


# ---------------------------------------------------------------- output


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


class Writer:
    def __init__(self, out: Path, cfg: ExperimentConfig, tolerances: dict):
        self.out = out
        self.header = {
            "tool": "quadlind",
            "version": __version__,
            "config_sha256": cfg.sha256,
            "tolerances": tolerances,
        }
        out.mkdir(parents=True, exist_ok=True)

    def csv(self, name: str, columns, rows) -> None:
        lines = [
            f"# tool: quadlind {__version__}",
            f"# config_sha256: {self.header['config_sha256']}",
            "# tolerances: " + ", ".join(f"{k}={_fmt(v)}" for k, v in self.header["tolerances"].items()),
            ",".join(columns),
        ]
        lines += [",".join(_fmt(v) for v in row) for row in rows]
        (self.out / name).write_text("\n".join(lines) + "\n")

    def json(self, name: str, payload: dict) -> None:
        doc = {"header": self.header, **payload}
        (self.out / name).write_text(json.dumps(_jsonable(doc), indent=2, allow_nan=False) + "\n")


def _matrix_rows(M, prefix=()):
    n = M.shape[0]
    return [(*prefix, k, q, M[k, q].real, M[k, q].imag) for k in range(n) for q in range(n)]


def _corr_rows(corr, prefix=()):
    n = corr.C.shape[0]
    return [
        (*prefix, i + 1, j + 1, corr.C[i, j].real, corr.C[i, j].imag, corr.F[i, j].real, corr.F[i, j].imag)
        for i in range(n)
        for j in range(n)
    ]


# ---------------------------------------------------------------- pipeline helpers


def _tolerance_args(cfg):
    t = cfg.tolerances
    return t.get("zero_tol"), t.get("cluster_tol"), t.get("validation_tol")


def _decomposition(cfg):
    zero_tol, _, vtol = _tolerance_args(cfg)
    return diagonalize(cfg.hamiltonian, zero_tol, vtol)


def _model(cfg) -> EffectiveModel:
    if not cfg.baths:
        raise ConfigurationError("this subcommand needs at least one bath in 'baths'")
    zero_tol, cluster_tol, vtol = _tolerance_args(cfg)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return build_effective_model(cfg.hamiltonian, cfg.baths, zero_tol, cluster_tol, validation_tol=vtol)


def _resolved_tolerances(cfg, zero_tol, cluster_tol) -> dict:
    out = {"zero_tol": zero_tol, "cluster_tol": cluster_tol}
    if "validation_tol" in cfg.tolerances:
        out["validation_tol"] = cfg.tolerances["validation_tol"]
    return out


def _times(run) -> np.ndarray:
    spec = run.get("times", [0.0])
    if isinstance(spec, dict):
        return np.linspace(spec.get("start", 0.0), spec["stop"], spec["num"])
    t = np.array(spec, dtype=float)
    if np.any(np.diff(t) < 0):
        raise ConfigurationError("run.times must be ascending")
    return t


def _initial(cfg, model: EffectiveModel) -> dyn.QuasiparticleState:
    spec = cfg.run.get("initial", "vacuum")
    n = model.n_modes
    if spec == "vacuum":
        return dyn.QuasiparticleState.vacuum(n)
    if isinstance(spec, str):
        try:
            T, mu = (float(x) for x in spec.split(":", 1)[1].split(","))
        except ValueError:
            raise ConfigurationError(f"run.initial: cannot parse {spec!r} as thermal:T,mu") from None
        if not T > 0:
            raise ConfigurationError("run.initial: temperature must be > 0")
        return dyn.QuasiparticleState.thermal(model.decomposition, T, mu)
    path = cfg.base_dir / spec["theta_file"]
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigurationError(f"run.initial.theta_file: cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError(
            f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None
    if not isinstance(data, dict) or "theta" not in data:
        raise ConfigurationError(f"{path}: expected an object with a 'theta' matrix")
    theta = parse_matrix(data["theta"], "theta")
    kappa = parse_matrix(data["kappa"], "kappa") if "kappa" in data else None
    state = dyn.QuasiparticleState(theta, kappa)
    if state.n_modes != n:
        raise ConfigurationError(f"{path}: theta is {state.n_modes}x{state.n_modes}, model has {n} modes")
    try:
        state.check(model.zeta)
    except ValueError as exc:
        raise ConfigurationError(f"{path}: {exc}") from None
    return state


# ---------------------------------------------------------------- subcommands


def cmd_diagonalize(cfg, out):
    dec = _decomposition(cfg)
    zero_tol, cluster_tol = dec.tolerances
    zero_tol = cfg.tolerances.get("zero_tol", zero_tol)
    cluster_tol = cfg.tolerances.get("cluster_tol", cluster_tol)
    cls = classify_spectrum(dec, zero_tol, cluster_tol)
    w = Writer(out, cfg, _resolved_tolerances(cfg, zero_tol, cluster_tol))
    w.csv("spectrum.csv", ["k", "omega"], [(k, x) for k, x in enumerate(dec.omegas)])
    n = dec.n_modes
    w.csv(
        "bogoliubov.csv",
        ["i", "k", "ReA", "ImA", "ReB", "ImB"],
        [(i + 1, k, dec.A[i, k].real, dec.A[i, k].imag, dec.B[i, k].real, dec.B[i, k].imag)
         for i in range(n) for k in range(n)],
    )
    res = verify_canonical(dec)
    w.json("diagonalize.json", {
        "statistics": "fermion" if dec.zeta == 1 else "boson",
        "omegas": dec.omegas,
        "constant_shift": dec.constant_shift,
        "residuals": {
            "AdagA": res.AdagA, "AAdag": res.AAdag, "AdagB": res.AdagB, "ABT": res.ABT,
            "nambu": res.nambu, "reconstruction": reconstruct_residual(dec, cfg.hamiltonian),
        },
        "zero_modes": list(cls.zero_modes),
        "classes": [list(c) for c in cls.classes],
        "smallest_gap": cls.smallest_gap,
    })


def _model_summary(model: EffectiveModel) -> dict:
    zm = model.zero_mode
    return {
        "omegas": model.omegas,
        "omega_tilde": model.omega_tilde,
        "gamma": model.gamma,
        "f_at_modes": model.f_at_modes,
        "Phi": model.Phi,
        "classes": [list(c) for c in model.classification.classes],
        "flags": {
            "degenerate": model.is_degenerate,
            "closed_form_available": model.closed_form_available,
            "non_relaxing_modes": list(model.non_relaxing_modes),
        },
        "zero_mode": None if zm is None else {
            "index": zm.index, "Delta": zm.Delta, "Psi": [complex(x) for x in zm.Psi],
            "closed_form": zm.closed_form,
        },
        "degeneracy_blocks": None if model.degeneracy is None else {
            f"bath{n}_class{lam}": {"re": blk.real, "im": blk.imag}
            for (n, lam), blk in sorted(model.degeneracy.phi_blocks.items())
        },
        "notes": list(model.notes),
    }


def cmd_build(cfg, out):
    model = _model(cfg)
    w = Writer(out, cfg, _resolved_tolerances(cfg, model.zero_tol, model.cluster_tol))
    w.json("effective_model.json", _model_summary(model))


def cmd_dynamics(cfg, out):
    model = _model(cfg)
    model.require_closed_form()
    w = Writer(out, cfg, _resolved_tolerances(cfg, model.zero_tol, model.cluster_tol))
    init = _initial(cfg, model)
    theta_rows, corr_rows = [], []
    for t in _times(cfg.run):
        st = dyn.evolve_two_point(model, init, t)
        theta_rows += _matrix_rows(st.theta, (t,))
        corr_rows += _corr_rows(dyn.real_space_correlations(model.decomposition, st), (t,))
    w.csv("theta.csv", ["t", "k", "q", "Re", "Im"], theta_rows)
    w.csv("correlations.csv", ["t", "i", "j", "ReC", "ImC", "ReF", "ImF"], corr_rows)


def cmd_steady(cfg, out):
    model = _model(cfg)
    w = Writer(out, cfg, _resolved_tolerances(cfg, model.zero_tol, model.cluster_tol))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        st = dyn.steady_theta(model)
    corr = dyn.real_space_correlations(model.decomposition, st)
    G = dyn.density_density(corr)
    n = model.n_modes
    w.csv("steady_theta.csv", ["k", "q", "Re", "Im"], _matrix_rows(st.theta))
    w.csv("steady_correlations.csv", ["i", "j", "ReC", "ImC", "ReF", "ImF"], _corr_rows(corr))
    w.csv("density_density.csv", ["i", "j", "G"], [(i + 1, j + 1, G[i, j]) for i in range(n) for j in range(n)])


def cmd_transport(cfg, out):
    model = _model(cfg)
    w = Writer(out, cfg, _resolved_tolerances(cfg, model.zero_tol, model.cluster_tol))
    rep = tr.transport_report(model, cfg.run.get("mu_reference"))
    w.json("transport.json", rep.as_dict())


def cmd_onsager(cfg, out):
    model = _model(cfg)
    w = Writer(out, cfg, _resolved_tolerances(cfg, model.zero_tol, model.cluster_tol))
    ref = cfg.run.get("reference")
    if ref is None:
        b = model.baths
        ref = {"T": float(np.mean([x.temperature for x in b])), "mu": float(np.mean([x.mu for x in b]))}
    point = tr.LinearResponsePoint(ref["mu"], ref["T"], ref.get("dmu", 1e-4), ref.get("dT", 1e-4))
    res = tr.onsager_matrix(model, point)
    fd = tr.onsager_finite_difference(model, point)
    scale = float(np.max(np.abs(res.L))) or 1.0
    w.json("onsager.json", {
        "reference": {"T": point.T, "mu": point.mu, "dT": point.dT, "dmu": point.dmu},
        "L": res.L,
        "asymmetry": res.asymmetry,
        "finite_difference": fd,
        "finite_difference_residual": float(np.max(np.abs(fd - res.L))) / scale,
    })


def _threads() -> int:
    raw = os.environ.get("QUADLIND_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigurationError(f"QUADLIND_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigurationError("QUADLIND_THREADS must be >= 1")
    return n


def cmd_sweep(cfg, out):
    model = _model(cfg)
    if model.n_baths != 2:
        raise ConfigurationError("sweep needs exactly 2 baths")
    model.require_closed_form()
    grid = cfg.run.get("sweep")
    if grid is None:
        raise ConfigurationError("sweep needs run.sweep with T_L, T_R, mu_L, mu_R lists")
    axes = [[float(x) for x in grid[key]] for key in ("T_L", "T_R", "mu_L", "mu_R")]
    points = list(itertools.product(*axes))
    mu_ref = cfg.run.get("mu_reference")

    def evaluate(p):
        TL, TR, muL, muR = p
        m = model.with_bath_parameters([TL, TR], [muL, muR])
        ref = 0.5 * (muL + muR) if mu_ref is None else mu_ref
        return (TL, TR, muL, muR, tr.particle_current(m), tr.quasiparticle_current(m),
                tr.energy_current(m), tr.heat_current(m, ref))

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        rows = list(pool.map(evaluate, points))
    w = Writer(out, cfg, _resolved_tolerances(cfg, model.zero_tol, model.cluster_tol))
    w.csv("sweep.csv", ["T_L", "T_R", "mu_L", "mu_R", "J_N", "J_NQ", "J_E", "J_Q"], rows)


def _oracle_setup(cfg, model):
    opts = cfg.run.get("oracle", {})
    gen = orc.build_generator(model, opts.get("cutoff", orc.DEFAULT_BOSON_CUTOFF), opts.get("cap", orc.DEFAULT_CAP))
    return gen


def _oracle_initial(cfg, model, gen):
    init = _initial(cfg, model)
    offdiag = init.theta - np.diag(init.theta.diagonal())
    if np.any(np.abs(offdiag) > 0) or np.any(init.kappa):
        raise CapabilityError("the oracle accepts only initial states diagonal in the mode basis")
    return orc.product_state(gen.space, init.occupations), init


def _oracle_corr(gen, rho, zeta):
    C, _ = orc.two_point(gen, rho, "a")
    n = len(gen.a)
    a = [x.toarray() for x in gen.a]
    F = np.array([[orc.expectation(rho, a[i].conj().T @ a[j].conj().T) for j in range(n)] for i in range(n)])
    return dyn.CorrelationSet(C, F, zeta)


def _oracle_currents(gen, model, rho):
    bops = [x.toarray() for x in gen.b]
    aops = [x.toarray() for x in gen.a]
    N = sum(x.conj().T @ x for x in aops)
    NQ = sum(x.conj().T @ x for x in bops)
    E = sum(w * x.conj().T @ x for w, x in zip(model.omegas, bops))
    return {
        "J_N": orc.flux(gen, model, rho, 0, N),
        "J_NQ": orc.flux(gen, model, rho, 0, NQ),
        "J_E": orc.flux(gen, model, rho, 0, E),
    }


def cmd_oracle(cfg, out):
    model = _model(cfg)
    gen = _oracle_setup(cfg, model)
    w = Writer(out, cfg, _resolved_tolerances(cfg, model.zero_tol, model.cluster_tol))
    rho0, init = _oracle_initial(cfg, model, gen)
    times = _times(cfg.run)
    rhos = orc.integrate(gen, rho0, times)
    theta_rows, corr_rows, cmp_rows = [], [], []
    for t, rho in zip(times, rhos):
        theta, _ = orc.two_point(gen, rho)
        corr = _oracle_corr(gen, rho, model.zeta)
        theta_rows += _matrix_rows(theta, (t,))
        corr_rows += _corr_rows(corr, (t,))
        if model.closed_form_available:
            st = dyn.evolve_two_point(model, init, t)
            cc = dyn.real_space_correlations(model.decomposition, st)
            cmp_rows.append((t, np.max(np.abs(st.theta - theta)), np.max(np.abs(cc.C - corr.C)),
                             np.max(np.abs(cc.F - corr.F))))
    w.csv("oracle_theta.csv", ["t", "k", "q", "Re", "Im"], theta_rows)
    w.csv("oracle_correlations.csv", ["t", "i", "j", "ReC", "ImC", "ReF", "ImF"], corr_rows)
    if cmp_rows:
        w.csv("comparison.csv", ["t", "max_abs_theta", "max_abs_C", "max_abs_F"], cmp_rows)
    ss = orc.steady_state(gen)
    theta, _ = orc.two_point(gen, ss.rho)
    payload = {"dimension": gen.dimension, "nullity": ss.nullity, "occupations": theta.diagonal().real}
    if model.n_baths == 2:
        payload["currents_left"] = _oracle_currents(gen, model, ss.rho)
    w.json("oracle_steady.json", payload)


def cmd_compare(cfg, out):
    model = _model(cfg)
    gen = _oracle_setup(cfg, model)
    w = Writer(out, cfg, _resolved_tolerances(cfg, model.zero_tol, model.cluster_tol))
    ss = orc.steady_state(gen)
    theta_o, _ = orc.two_point(gen, ss.rho)
    corr_o = _oracle_corr(gen, ss.rho, model.zeta)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        st = dyn.steady_theta(model)
    corr = dyn.real_space_correlations(model.decomposition, st)
    diffs = {
        "theta": np.max(np.abs(st.theta - theta_o)),
        "C": np.max(np.abs(corr.C - corr_o.C)),
        "F": np.max(np.abs(corr.F - corr_o.F)),
        "G": np.max(np.abs(dyn.density_density(corr) - dyn.density_density(corr_o))),
    }
    payload = {"nullity": ss.nullity, "max_abs_diff": diffs}
    if model.n_baths == 2:
        rep = tr.transport_report(model)
        oc = _oracle_currents(gen, model, ss.rho)
        payload["currents"] = {
            k: {"closed_form": getattr(rep, k), "oracle": oc[k], "abs_diff": abs(getattr(rep, k) - oc[k])}
            for k in ("J_N", "J_NQ", "J_E")
        }
    w.json("compare.json", payload)


COMMANDS = {
    "diagonalize": cmd_diagonalize,
    "build": cmd_build,
    "dynamics": cmd_dynamics,
    "steady": cmd_steady,
    "transport": cmd_transport,
    "onsager": cmd_onsager,
    "sweep": cmd_sweep,
    "oracle": cmd_oracle,
    "compare": cmd_compare,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quadlind", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"quadlind {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, type=Path, help="JSON experiment configuration")
        p.add_argument("--out", type=Path, default=Path("."), help="output directory (default: .)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        cfg = load_config(args.config)
        COMMANDS[args.command](cfg, args.out)
    except QuadlindError as exc:
        print(f"quadlind {args.command}: error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
