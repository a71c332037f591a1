"""Command-line interface: per-figure reproduction recipes and sweeps.

Angles are given in units of pi (``--theta-up 0.1`` means 0.1*pi).  Exit
codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .basis import BasisSpec, build_basis
from .dynamics import propagate, time_averaged_density, trajectory_observables
from .meanfield import meanfield_report
from .observables import (StateVector, density_profile, entanglement_entropy,
                          edge_imbalance, interspecies_correlation,
                          intraspecies_correlation)
from .operators import build_hamiltonian
from .params import ModelParams
from .spectral import eigensystem, top_im_eigenpair
from .sweep import (SweepGrid, SweepTable, TASKS, emit, run_sweep)
from .topology import ansatz_two_level, bbs_a2, m_matrix

_STATS_CHOICES = ("single", "boson", "fermion")


class ConfigError(ValueError):
    pass


def load_config(path: str) -> dict:
    """Parse a declarative key = value file; values are JSON scalars when
    they parse, bare strings otherwise."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for ln, line in enumerate(fh, 1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{ln}: expected 'key = value'")
                key, _, val = line.partition("=")
                key = key.strip().replace("-", "_")
                val = val.strip()
                try:
                    out[key] = json.loads(val)
                except json.JSONDecodeError:
                    out[key] = val
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return out


def _model_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("model")
    g.add_argument("--config", help="key = value file supplying flag defaults")
    g.add_argument("--L", type=int, default=32)
    g.add_argument("--t", type=float, default=0.5)
    g.add_argument("--gamma-up", type=float, default=0.0)
    g.add_argument("--gamma-dn", type=float, default=0.0)
    g.add_argument("--theta-up", type=float, default=None, help="in units of pi")
    g.add_argument("--theta-dn", type=float, default=None, help="in units of pi")
    g.add_argument("--r", type=float, default=math.sqrt(2.0))
    g.add_argument("--u-up", type=float, default=None)
    g.add_argument("--v-up", type=float, default=None)
    g.add_argument("--u-dn", type=float, default=None)
    g.add_argument("--v-dn", type=float, default=None)
    g.add_argument("--bc-up", choices=("open", "periodic"), default="open")
    g.add_argument("--bc-dn", choices=("open", "periodic"), default="open")
    g.add_argument("--disorder", type=float, default=0.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--shared-disorder", action="store_true")
    g.add_argument("--no-dgf", action="store_true")
    g.add_argument("--nrh", type=float, default=0.0)
    g.add_argument("--stats", nargs=2, choices=_STATS_CHOICES,
                   default=("single", "single"), metavar=("UP", "DN"))
    g.add_argument("--out", default="-", help="output path ('-' prints to stdout)")
    g.add_argument("--format", choices=("csv", "json"), default="csv")
    g.add_argument("--workers", type=int, default=1)
    return p


def params_from_args(args, need_couplings: bool = True) -> ModelParams:
    uv = (args.u_up, args.v_up, args.u_dn, args.v_dn)
    uses_uv = any(v is not None for v in uv)
    uses_theta = args.theta_up is not None or args.theta_dn is not None
    if uses_uv and uses_theta:
        raise ConfigError("--u/--v flags are exclusive with --theta-up/--theta-dn")
    common = dict(
        L=args.L, t=args.t, gamma_up=args.gamma_up, gamma_dn=args.gamma_dn,
        bc_up=args.bc_up, bc_dn=args.bc_dn, disorder_lambda=args.disorder,
        disorder_seed=args.seed, disorder_shared=args.shared_disorder,
        nrh_strength=args.nrh, include_dgf=not args.no_dgf)
    if uses_uv:
        if any(v is None for v in uv):
            raise ConfigError("all four of --u-up --v-up --u-dn --v-dn are required together")
        return ModelParams(u_up=uv[0], v_up=uv[1], u_dn=uv[2], v_dn=uv[3], **common)
    if uses_theta:
        if args.theta_up is None or args.theta_dn is None:
            raise ConfigError("both --theta-up and --theta-dn are required together")
        return ModelParams.from_angles(args.L, args.theta_up * math.pi,
                                       args.theta_dn * math.pi, args.r,
                                       **{k: v for k, v in common.items() if k != "L"})
    if need_couplings:
        raise ConfigError("couplings required: give --theta-up/--theta-dn or the --u/--v set")
    return ModelParams(**common)


def spec_from_args(args) -> BasisSpec:
    def one(s):
        return (1, "boson") if s == "single" else (2, s)
    n_up, st_up = one(args.stats[0])
    n_dn, st_dn = one(args.stats[1])
    return BasisSpec(n_up=n_up, n_dn=n_dn, stat_up=st_up, stat_dn=st_dn)


def _manifest(args, extra=None) -> dict:
    m = {"command": args.command, "code_version": __version__,
         "seed": args.seed}
    if extra:
        m.update(extra)
    return m


def _emit(args, table: SweepTable):
    if args.out == "-":
        import io
        from .sweep import _format_value
        buf = [",".join(table.columns)]
        for row in table.rows:
            buf.append(",".join(_format_value(v) for v in row))
        print("\n".join(buf))
    else:
        emit(table, args.out, args.format)
        print(f"wrote {args.out}")


def _table(columns, rows, manifest) -> SweepTable:
    return SweepTable(columns=columns, rows=rows, manifest=manifest)


# ---------------------------------------------------------------------------
# subcommands


def cmd_spectrum(args):
    params = params_from_args(args)
    spec = spec_from_args(args)
    basis = build_basis(spec, params.L)
    H = build_hamiltonian(params, basis)
    if args.no_observables:
        w = np.linalg.eigvals(H.toarray())
        w = w[np.lexsort((w.imag, w.real))]
        rows = [[float(e.real), float(e.imag)] for e in w]
        _emit(args, _table(["re_e", "im_e"], rows, _manifest(args)))
        return
    es = eigensystem(H)
    single_pair = spec.n_up == 1 and spec.n_dn == 1
    rows = []
    best = (-1.0, None)
    for m in range(es.dim):
        psi = StateVector.normalized(basis, es.right[:, m])
        prof_up = density_profile(psi, "up")
        ent = entanglement_entropy(psi) if single_pair else float("nan")
        rows.append([float(es.eigenvalues[m].real), float(es.eigenvalues[m].imag),
                     edge_imbalance(psi), ent,
                     float(prof_up[0] + prof_up[2])])
        key = ent if args.corr_pick == "max-entropy" else es.eigenvalues[m].imag
        if single_pair and key > best[0]:
            best = (key, psi)
    _emit(args, _table(
        ["re_e", "im_e", "edge_imbalance_dn", "entropy", "up_left_edge_weight"],
        rows, _manifest(args)))
    if args.corr_out and best[1] is not None:
        _emit_correlation(args, best[1], args.corr_out)


def _emit_correlation(args, psi: StateVector, path: str):
    _, gn = interspecies_correlation(psi)
    rows = [[j + 1, jp + 1, float(np.real(gn[j, jp])), float(np.imag(gn[j, jp])),
             float(np.abs(gn[j, jp]))]
            for j in range(gn.shape[0]) for jp in range(gn.shape[1])]
    emit(_table(["j", "jp", "re", "im", "abs"], rows,
                _manifest(args, {"content": "normalized interspecies correlation"})),
         path, args.format)
    print(f"wrote {path}")


def cmd_invariants(args):
    params = params_from_args(args)
    grid = SweepGrid.from_uv_points(params, spec_from_args(args), "invariants",
                                    [(params.u_up, params.v_up, params.u_dn, params.v_dn)])
    _emit(args, run_sweep(grid))


def cmd_condnum(args):
    params = params_from_args(args)
    grid = SweepGrid.from_uv_points(params, spec_from_args(args), "cond-number",
                                    [(params.u_up, params.v_up, params.u_dn, params.v_dn)])
    _emit(args, run_sweep(grid))


def cmd_mmatrix(args):
    params = params_from_args(args)
    rows = []
    sectors = {"0": (0.0,), "pi": (math.pi,), "both": (0.0, math.pi)}[args.K]
    n = params.L // 2
    for K in sectors:
        M = m_matrix(params, K)
        for i in range(params.L):
            for j in range(params.L):
                rows.append([("0" if K == 0.0 else "pi"),
                             i, j,
                             "+-" if i < n else "-+", i % n,
                             "+-" if j < n else "-+", j % n,
                             float(M[i, j])])
    _emit(args, _table(
        ["K", "row", "col", "band_row", "m_row", "band_col", "m_col", "value"],
        rows, _manifest(args)))


def cmd_bbs_energy(args):
    params = params_from_args(args)
    modes = ("sum", "integral") if args.mode == "both" else (args.mode,)
    rows = []
    for K, klab in ((0.0, "0"), (math.pi, "pi")):
        for mode in modes:
            a2 = bbs_a2(params, K, mode)
            rows.append([klab, mode, a2, math.sqrt(a2)])
    _emit(args, _table(["K", "mode", "a2", "im_e_plus"], rows, _manifest(args)))


def _theta_axis(lo: float, hi: float, n: int) -> np.ndarray:
    axis = np.linspace(lo * math.pi, hi * math.pi, n)
    crit = np.array([math.pi / 4, 3 * math.pi / 4])
    if n > 1 and np.min(np.abs(axis[:, None] - crit[None, :])) < 1e-12:
        axis = axis + (axis[1] - axis[0]) / 2
        print("note: grid shifted by a half step off the gap-closing lines",
              file=sys.stderr)
    return axis


def cmd_phase_diagram(args):
    base = params_from_args(args, need_couplings=False)
    grid = SweepGrid.from_theta_axes(
        base, spec_from_args(args), args.task,
        _theta_axis(args.theta_up_min, args.theta_up_max, args.nx),
        _theta_axis(args.theta_dn_min, args.theta_dn_max, args.ny),
        r=args.r, workers=args.workers)
    _emit(args, run_sweep(grid))


def cmd_dynamics(args):
    params = params_from_args(args)
    spec = spec_from_args(args)
    if not (1 <= args.init_up <= params.L and 1 <= args.init_dn <= params.L):
        raise ConfigError(f"initial sites must lie in 1..{params.L}")
    basis = build_basis(spec, params.L)
    H = build_hamiltonian(params, basis)
    psi0 = StateVector.from_product(basis, (args.init_up,), (args.init_dn,))
    times = np.arange(0.0, args.tmax + 1e-9, args.dt)
    traj = propagate(H, psi0, times, method=args.method)
    obs = trajectory_observables(traj)
    cols = (["tau", "norm", "x_up", "x_dn"]
            + [f"n_up_{j}" for j in range(1, params.L + 1)]
            + [f"n_dn_{j}" for j in range(1, params.L + 1)])
    rows = []
    for i in range(len(times)):
        rows.append([float(times[i]), float(obs.norms[i]), float(obs.x_up[i]),
                     float(obs.x_dn[i])]
                    + [float(x) for x in obs.density_up[i]]
                    + [float(x) for x in obs.density_dn[i]])
    _emit(args, _table(cols, rows, _manifest(args, {"method": traj.method_used})))
    if args.final_corr_out:
        _emit_correlation(args, traj.normalized_state(len(times) - 1), args.final_corr_out)
    if args.avg_out:
        prof = time_averaged_density(traj, tuple(args.window), "dn")
        rows = [[j + 1, float(prof[j])] for j in range(params.L)]
        emit(_table(["site", "n_dn_avg"], rows,
                    _manifest(args, {"window": list(args.window)})),
             args.avg_out, args.format)
        print(f"wrote {args.avg_out}")


def cmd_meanfield(args):
    params = params_from_args(args)
    rep = meanfield_report(params)
    L = params.L
    cols = ["boundary", "re_e", "im_e", "edge_imbalance"] + \
        [f"n_dn_{j}" for j in range(1, L + 1)]
    rows = []
    for m in range(L):
        rows.append(["open", float(rep.obc_eigenvalues[m].real),
                     float(rep.obc_eigenvalues[m].imag),
                     float(rep.edge_imbalance[m])]
                    + [float(x) for x in rep.obc_profiles[:, m]])
    for m in range(L):
        rows.append(["periodic", float(rep.pbc_eigenvalues[m].real),
                     float(rep.pbc_eigenvalues[m].imag), float("nan")]
                    + [float("nan")] * L)
    rows.append(["average", float("nan"), float("nan"), float("nan")]
                + [float(x) for x in rep.average_profile])
    _emit(args, _table(cols, rows, _manifest(args, {
        "kappa": rep.model.kappa, "eta": rep.model.eta, "t_prime": rep.model.t_prime})))


def cmd_ansatz_check(args):
    params = params_from_args(args)
    res = ansatz_two_level(params, args.family)
    rows = []
    for name, M in (("projected", res.projected), ("predicted", res.predicted)):
        for i in range(2):
            for j in range(2):
                rows.append([args.family, name, i, j,
                             float(np.real(M[i, j])), float(np.imag(M[i, j]))])
    diff = float(np.abs(res.projected - res.predicted).max())
    rows.append([args.family, "max_abs_diff", -1, -1, diff, 0.0])
    rows.append([args.family, "family_matches_phase", -1, -1,
                 float(res.family_matches_phase), 0.0])
    rows.append([args.family, "pt_broken_predicted", -1, -1,
                 float(res.pt_broken_predicted), 0.0])
    _emit(args, _table(["family", "entry", "row", "col", "re", "im"],
                       rows, _manifest(args)))


def cmd_multiparticle(args):
    params = params_from_args(args)
    spec = spec_from_args(args)
    if spec.n_up == 1 and spec.n_dn == 1:
        raise ConfigError("multiparticle needs --stats with boson/fermion entries")
    basis = build_basis(spec, params.L)
    H = build_hamiltonian(params, basis)
    w = np.linalg.eigvals(H.toarray())
    w = w[np.lexsort((w.imag, w.real))]
    rows = [[float(e.real), float(e.imag)] for e in w]
    _emit(args, _table(["re_e", "im_e"], rows,
                       _manifest(args, {"dim": basis.dim})))
    if args.top_state_corr:
        E, vec, res, meth = top_im_eigenpair(H, method=args.top_state_method)
        psi = StateVector.normalized(basis, vec)
        rows = []
        _, gn = interspecies_correlation(psi)
        mats = [("gamma", gn)]
        for spn in ("up", "dn"):
            if spec.n(spn) == 2:
                _, gs = intraspecies_correlation(psi, spn)
                mats.append((f"g_{spn}", gs))
        for name, M in mats:
            for j in range(M.shape[0]):
                for jp in range(M.shape[1]):
                    rows.append([name, j + 1, jp + 1, float(np.real(M[j, jp])),
                                 float(np.abs(M[j, jp]))])
        emit(_table(["matrix", "j", "jp", "re", "abs"], rows,
                    _manifest(args, {"top_e_re": E.real, "top_e_im": E.imag,
                                     "residual": res, "method": meth})),
             args.top_state_corr, args.format)
        print(f"wrote {args.top_state_corr}")


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parent = _model_parent()
    ap = argparse.ArgumentParser(prog="dgfchain", description=__doc__)
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", parents=[parent],
                       help="eigenvalues plus per-state observables")
    p.add_argument("--no-observables", action="store_true")
    p.add_argument("--corr-out", help="write the picked state's correlation matrix")
    p.add_argument("--corr-pick", choices=("max-entropy", "max-im"),
                   default="max-entropy")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("invariants", parents=[parent],
                       help="inter-species invariants at one parameter point")
    p.set_defaults(func=cmd_invariants)

    p = sub.add_parser("mmatrix", parents=[parent],
                       help="gauge-hop matrix in the K sectors (long form)")
    p.add_argument("--K", choices=("0", "pi", "both"), default="both")
    p.set_defaults(func=cmd_mmatrix)

    p = sub.add_parser("bbs-energy", parents=[parent],
                       help="bound-state energies from the sum/integral forms")
    p.add_argument("--mode", choices=("sum", "integral", "both"), default="both")
    p.set_defaults(func=cmd_bbs_energy)

    p = sub.add_parser("phase-diagram", parents=[parent],
                       help="theta-theta sweep of a selected task")
    p.add_argument("--task", choices=TASKS, default="invariants")
    p.add_argument("--nx", type=int, default=50)
    p.add_argument("--ny", type=int, default=50)
    p.add_argument("--theta-up-min", type=float, default=0.0)
    p.add_argument("--theta-up-max", type=float, default=1.0)
    p.add_argument("--theta-dn-min", type=float, default=0.0)
    p.add_argument("--theta-dn-max", type=float, default=1.0)
    p.set_defaults(func=cmd_phase_diagram)

    p = sub.add_parser("dynamics", parents=[parent],
                       help="time evolution from a two-site product state")
    p.add_argument("--init-up", type=int, default=15)
    p.add_argument("--init-dn", type=int, default=18)
    p.add_argument("--tmax", type=float, default=150.0)
    p.add_argument("--dt", type=float, default=0.5)
    p.add_argument("--method", choices=("eig", "expm-step"), default="eig")
    p.add_argument("--window", type=float, nargs=2, default=(50.0, 150.0))
    p.add_argument("--final-corr-out")
    p.add_argument("--avg-out")
    p.set_defaults(func=cmd_dynamics)

    p = sub.add_parser("meanfield", parents=[parent],
                       help="effective down-species model report")
    p.set_defaults(func=cmd_meanfield)

    p = sub.add_parser("condnum", parents=[parent],
                       help="eigenvector condition number at one point")
    p.set_defaults(func=cmd_condnum)

    p = sub.add_parser("ansatz-check", parents=[parent],
                       help="two-mode projection vs the closed form")
    p.add_argument("--family", choices=("mmm", "ppm", "pmm", "mpp"), required=True)
    p.set_defaults(func=cmd_ansatz_check)

    p = sub.add_parser("multiparticle", parents=[parent],
                       help="two-per-species spectra and correlations")
    p.add_argument("--top-state-corr", help="write correlations of the max-Im state")
    p.add_argument("--top-state-method", choices=("auto", "power", "dense"),
                   default="auto")
    p.set_defaults(func=cmd_multiparticle)
    return ap


def _apply_config(argv: list[str]) -> list[str]:
    """Turn config-file keys into leading defaults so explicit flags win."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        raise ConfigError("--config needs a path")
    cfg = load_config(argv[i + 1])
    injected = []
    for key, val in cfg.items():
        flag = "--" + key.replace("_", "-")
        if isinstance(val, bool):
            if val:
                injected.append(flag)
        elif isinstance(val, list):
            injected.append(flag)
            injected.extend(str(v) for v in val)
        else:
            injected.extend([flag, str(val)])
    # keep the subcommand first, inject config values before explicit flags
    return argv[:1] + injected + argv[1:]


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _apply_config(argv)
        args = build_parser().parse_args(argv)
        args.func(args)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
