"""Parameter-grid sweeps with a worker pool, and deterministic table emission.

Each grid point is evaluated independently; failures land in the error
column instead of aborting the sweep.  Results are merged in grid order,
so serial and parallel runs emit identical tables.
"""

from __future__ import annotations

import concurrent.futures
import csv
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .basis import BasisSpec, build_basis
from .observables import StateVector, entanglement_entropy
from .operators import build_hamiltonian
from .params import ModelParams
from .spectral import condition_number, eigensystem
from .topology import CriticalParameterError, classify_phase, bbs_a2, dgf_magnitude

TASKS = ("max-im-energy", "max-entropy", "invariants", "dgf-magnitude",
         "cond-number", "pt-flags")


@dataclass
class SweepGrid:
    base: ModelParams
    spec: BasisSpec
    task: str
    points: list[dict] = field(default_factory=list)
    workers: int = 1
    axes: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValueError(f"task must be one of {TASKS}, got {self.task!r}")

    @staticmethod
    def from_theta_axes(base: ModelParams, spec: BasisSpec, task: str,
                        theta_up, theta_dn, r: float = math.sqrt(2.0),
                        workers: int = 1) -> "SweepGrid":
        """Cartesian grid over hopping angles (radians), fixed magnitude r."""
        pts = []
        for tu in theta_up:
            for td in theta_dn:
                pts.append({
                    "theta_up": float(tu), "theta_dn": float(td),
                    "u_up": r * math.cos(tu), "v_up": r * math.sin(tu),
                    "u_dn": r * math.cos(td), "v_dn": r * math.sin(td),
                })
        return SweepGrid(base=base, spec=spec, task=task, points=pts,
                         workers=workers,
                         axes={"theta_up": list(map(float, theta_up)),
                               "theta_dn": list(map(float, theta_dn)),
                               "r": r})

    @staticmethod
    def from_uv_points(base: ModelParams, spec: BasisSpec, task: str,
                       uv_points, workers: int = 1) -> "SweepGrid":
        """Explicit list of (u_up, v_up, u_dn, v_dn) tuples."""
        pts = []
        for (uu, vu, ud, vd) in uv_points:
            pts.append({"theta_up": math.atan2(vu, uu), "theta_dn": math.atan2(vd, ud),
                        "u_up": uu, "v_up": vu, "u_dn": ud, "v_dn": vd})
        return SweepGrid(base=base, spec=spec, task=task, points=pts,
                         workers=workers, axes={"explicit": len(pts)})


@dataclass
class SweepTable:
    columns: list[str]
    rows: list[list]
    manifest: dict

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [row[i] for row in self.rows]


_PARAM_COLUMNS = ["theta_up", "theta_dn", "u_up", "v_up", "u_dn", "v_dn"]


def _evaluate_point(task: str, base: ModelParams, spec: BasisSpec, point: dict) -> dict:
    params = base.replace(u_up=point["u_up"], v_up=point["v_up"],
                          u_dn=point["u_dn"], v_dn=point["v_dn"])
    out = {k: point[k] for k in _PARAM_COLUMNS}
    out["error"] = ""
    try:
        if task == "invariants":
            lab = classify_phase(params)
            out.update(I_00=lab.I_00, I_pipi=lab.I_pipi, I_0pi=lab.I_0pi,
                       I_pi0=lab.I_pi0, I_ext=lab.I_ext,
                       I_sin_up=lab.indicators_up[2], I_sin_dn=lab.indicators_dn[2],
                       label=lab.label, region=_region_code(lab))
        elif task == "dgf-magnitude":
            out.update(M=dgf_magnitude(params),
                       a2_K0=bbs_a2(params, 0.0), a2_Kpi=bbs_a2(params, math.pi))
        elif task == "pt-flags":
            lab = classify_phase(params)
            out.update(label=lab.label,
                       bulk_bound_pt_broken=int(lab.bulk_bound_pt_broken),
                       sp_pt_broken_up=int(lab.sp_pt_broken_up),
                       sp_pt_broken_dn=int(lab.sp_pt_broken_dn),
                       edge_confined_possible=int(lab.edge_confined_possible))
        elif task == "max-im-energy":
            basis = build_basis(spec, params.L)
            H = build_hamiltonian(params, basis)
            ev = np.linalg.eigvals(H.toarray())
            out.update(max_im_e=float(ev.imag.max()), max_re_e=float(ev.real.max()))
        elif task == "max-entropy":
            basis = build_basis(spec, params.L)
            H = build_hamiltonian(params, basis)
            es = eigensystem(H)
            best, best_im = 0.0, 0.0
            for m in range(es.dim):
                s = entanglement_entropy(StateVector.normalized(basis, es.right[:, m]))
                if s > best:
                    best, best_im = s, float(es.eigenvalues[m].imag)
            out.update(max_entropy=best, max_entropy_im_e=best_im)
        elif task == "cond-number":
            basis = build_basis(spec, params.L)
            H = build_hamiltonian(params, basis)
            cond = condition_number(eigensystem(H))
            out.update(cond=cond, ln_cond=float(np.log(cond)))
        else:
            raise ValueError(f"unknown task {task!r}")
    except (CriticalParameterError, ValueError, ArithmeticError,
            np.linalg.LinAlgError) as exc:
        out["error"] = f"{type(exc).__name__}: {exc}"
    return out


def _region_code(lab) -> int:
    code = 0
    for s in (lab.I_00, lab.I_pipi, lab.I_0pi):
        code = code * 2 + (1 if s > 0 else 0)
    return code


_TASK_COLUMNS = {
    "invariants": ["I_00", "I_pipi", "I_0pi", "I_pi0", "I_ext",
                   "I_sin_up", "I_sin_dn", "label", "region"],
    "dgf-magnitude": ["M", "a2_K0", "a2_Kpi"],
    "pt-flags": ["label", "bulk_bound_pt_broken", "sp_pt_broken_up",
                 "sp_pt_broken_dn", "edge_confined_possible"],
    "max-im-energy": ["max_im_e", "max_re_e"],
    "max-entropy": ["max_entropy", "max_entropy_im_e"],
    "cond-number": ["cond", "ln_cond"],
}


def run_sweep(grid: SweepGrid) -> SweepTable:
    """Evaluate every grid point (in parallel when workers > 1)."""
    t0 = time.time()
    columns = _PARAM_COLUMNS + _TASK_COLUMNS[grid.task] + ["error"]
    if grid.workers > 1 and len(grid.points) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=grid.workers) as ex:
            results = list(ex.map(
                _evaluate_point,
                [grid.task] * len(grid.points),
                [grid.base] * len(grid.points),
                [grid.spec] * len(grid.points),
                grid.points,
                chunksize=max(1, len(grid.points) // (4 * grid.workers)),
            ))
    else:
        results = [_evaluate_point(grid.task, grid.base, grid.spec, p)
                   for p in grid.points]
    rows = [[res.get(c, float("nan")) for c in columns] for res in results]
    manifest = {
        "task": grid.task,
        "base_params": asdict(grid.base),
        "basis_spec": asdict(grid.spec),
        "axes": grid.axes,
        "n_points": len(grid.points),
        "workers": grid.workers,
        "seed": grid.base.disorder_seed,
        "code_version": __version__,
        "wall_time_s": round(time.time() - t0, 3),
    }
    return SweepTable(columns=columns, rows=rows, manifest=manifest)


# ---------------------------------------------------------------------------
# emission


def _format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if isinstance(v, (complex, np.complexfloating)):
        return f"{v.real:.17g}{v.imag:+.17g}j"
    return str(v)


def emit(table: SweepTable, path: str, format: str = "csv") -> str:
    """Write the table; CSV carries the manifest in leading '#' lines, JSON
    embeds it.  Re-reading reproduces every float bit-exactly."""
    if format == "csv":
        body = io.StringIO()
        writer = csv.writer(body, lineterminator="\n")
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([_format_value(v) for v in row])
        text = f"# manifest: {json.dumps(table.manifest, sort_keys=True)}\n" + body.getvalue()
    elif format == "json":
        text = json.dumps({"manifest": table.manifest,
                           "columns": table.columns,
                           "rows": [[_coerce_json(v) for v in row] for row in table.rows]},
                          indent=1)
    else:
        raise ValueError(f"format must be 'csv' or 'json', got {format!r}")
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write table to {path}: {exc}") from exc
    return path


def _coerce_json(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (complex, np.complexfloating)):
        return {"re": float(v.real), "im": float(v.imag)}
    return v


def csv_body(path: str) -> str:
    """CSV text without the manifest comment lines (determinism checks)."""
    with open(path, encoding="utf-8") as fh:
        return "".join(line for line in fh if not line.startswith("#"))


def read_table(path: str) -> SweepTable:
    """Read back an emitted table (CSV or JSON)."""
    if path.endswith(".json"):
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        rows = [[_from_json(v) for v in row] for row in doc["rows"]]
        return SweepTable(columns=doc["columns"], rows=rows, manifest=doc["manifest"])
    manifest = {}
    rows = []
    with open(path, encoding="utf-8") as fh:
        header = None
        for line in fh:
            if line.startswith("#"):
                if "manifest:" in line:
                    manifest = json.loads(line.split("manifest:", 1)[1])
                continue
            cells = next(csv.reader([line]))
            if header is None:
                header = cells
                continue
            rows.append([_parse_cell(c) for c in cells])
    return SweepTable(columns=header or [], rows=rows, manifest=manifest)


def _from_json(v):
    if isinstance(v, dict) and set(v) == {"re", "im"}:
        return complex(v["re"], v["im"])
    return v


def _parse_cell(cell: str):
    try:
        return int(cell)
    except ValueError:
        pass
    try:
        return float(cell)
    except ValueError:
        pass
    try:
        return complex(cell)
    except ValueError:
        return cell
