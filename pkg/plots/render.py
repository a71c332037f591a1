#!/usr/bin/env python3
"""Render paper-style figures from tables emitted by the dgfchain CLI.

Usage: python plots/render.py --recipe recipes/fig3d.recipe [key=value ...]

Recipes use the same declarative key = value format as the sweep configs.
This script reads only the documented CSV/JSON table schema; it never
imports the simulation package.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

KINDS = ("spectrum-scatter", "heatmap", "correlation-matrix",
         "dynamics-traces", "profile-overlay")


class RecipeError(ValueError):
    pass


def load_keyvalues(path: str) -> dict:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for ln, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise RecipeError(f"{path}:{ln}: expected 'key = value'")
            key, _, val = line.partition("=")
            val = val.strip()
            try:
                out[key.strip()] = json.loads(val)
            except json.JSONDecodeError:
                out[key.strip()] = val
    return out


def read_table(path: str) -> tuple[list[str], list[list]]:
    """Columns and rows of an emitted table (CSV with '#' manifest lines,
    or the JSON mirror)."""
    if path.endswith(".json"):
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        return doc["columns"], doc["rows"]
    columns, rows = None, []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#"):
                continue
            cells = next(csv.reader([line]))
            if columns is None:
                columns = cells
                continue
            parsed = []
            for c in cells:
                try:
                    parsed.append(float(c))
                except ValueError:
                    parsed.append(c)
            rows.append(parsed)
    if columns is None:
        raise RecipeError(f"{path}: no header row found")
    return columns, rows


def column(columns: list[str], rows: list[list], name: str) -> np.ndarray:
    if name not in columns:
        raise RecipeError(f"missing column {name!r}; available: {', '.join(columns)}")
    i = columns.index(name)
    return np.array([r[i] for r in rows])


def _require_rows(rows, path):
    if not rows:
        raise RecipeError(f"{path}: table has no data rows")


def _new_axes(recipe):
    fig, ax = plt.subplots(figsize=(5.0, 4.0), dpi=130)
    ax.set_xlabel(recipe.get("xlabel", ""))
    ax.set_ylabel(recipe.get("ylabel", ""))
    if "title" in recipe:
        ax.set_title(str(recipe["title"]))
    return fig, ax


def render_spectrum_scatter(recipe, columns, rows):
    fig, ax = _new_axes(recipe)
    x = column(columns, rows, recipe.get("x", "re_e"))
    y = column(columns, rows, recipe.get("y", "im_e"))
    color_col = recipe.get("color")
    if color_col:
        c = column(columns, rows, color_col)
        sc = ax.scatter(x, y, c=c, s=14, cmap=recipe.get("cmap", "coolwarm"))
        fig.colorbar(sc, ax=ax, label=color_col)
    else:
        ax.scatter(x, y, s=14, color="gray")
    return fig


def render_heatmap(recipe, columns, rows):
    fig, ax = _new_axes(recipe)
    x = column(columns, rows, recipe.get("x", "theta_up"))
    y = column(columns, rows, recipe.get("y", "theta_dn"))
    v = column(columns, rows, recipe["value"]).astype(float)
    xu, yu = np.unique(x), np.unique(y)
    grid = np.full((len(yu), len(xu)), np.nan)
    xi = np.searchsorted(xu, x)
    yi = np.searchsorted(yu, y)
    grid[yi, xi] = v
    mesh = ax.pcolormesh(xu, yu, grid, shading="nearest",
                         cmap=recipe.get("cmap", "viridis"))
    fig.colorbar(mesh, ax=ax, label=recipe["value"])
    return fig


def render_correlation_matrix(recipe, columns, rows):
    fig, ax = _new_axes(recipe)
    j = column(columns, rows, recipe.get("x", "j")).astype(int)
    jp = column(columns, rows, recipe.get("y", "jp")).astype(int)
    v = column(columns, rows, recipe.get("value", "abs")).astype(float)
    name = recipe.get("matrix")
    if name is not None and "matrix" in columns:
        keep = column(columns, rows, "matrix") == name
        j, jp, v = j[keep], jp[keep], v[keep]
        if not len(j):
            raise RecipeError(f"no rows with matrix == {name!r}")
    L = int(max(j.max(), jp.max()))
    grid = np.zeros((L, L))
    grid[j - 1, jp - 1] = v
    im = ax.imshow(grid.T, origin="lower", cmap=recipe.get("cmap", "magma"),
                   extent=(0.5, L + 0.5, 0.5, L + 0.5))
    fig.colorbar(im, ax=ax, label=recipe.get("value", "abs"))
    return fig


def render_dynamics_traces(recipe, columns, rows):
    fig, ax = _new_axes(recipe)
    x = column(columns, rows, recipe.get("x", "tau"))
    ys = recipe.get("columns", ["x_up", "x_dn"])
    if isinstance(ys, str):
        ys = [s.strip() for s in ys.split(",")]
    for name in ys:
        ax.plot(x, column(columns, rows, name), label=name)
    ax.legend()
    return fig


def _match(columns, row, clause: str) -> bool:
    key, _, val = clause.partition("=")
    got = row[columns.index(key)] if key in columns else None
    return str(got) == val


def render_profile_overlay(recipe, columns, rows):
    fig, ax = _new_axes(recipe)
    prefix = recipe.get("prefix", "n_dn_")
    sites, cols = [], []
    for i, c in enumerate(columns):
        if c.startswith(prefix):
            sites.append(int(c[len(prefix):]))
            cols.append(i)
    if not cols:
        raise RecipeError(f"missing column {prefix}*; no profile columns found")
    order = np.argsort(sites)
    sites = np.array(sites)[order]
    cols = [cols[k] for k in order]
    where = recipe.get("where")
    highlight = recipe.get("highlight-where")
    for row in rows:
        prof = np.array([row[c] for c in cols], dtype=float)
        if np.any(np.isnan(prof)):
            continue
        if highlight and _match(columns, row, highlight):
            ax.plot(sites, prof, color="black", lw=2.0, zorder=3)
        elif where is None or _match(columns, row, where):
            ax.plot(sites, prof, color="tab:orange", alpha=0.35, lw=0.8)
    ax.set_xlabel(recipe.get("xlabel", "site"))
    return fig


RENDERERS = {
    "spectrum-scatter": render_spectrum_scatter,
    "heatmap": render_heatmap,
    "correlation-matrix": render_correlation_matrix,
    "dynamics-traces": render_dynamics_traces,
    "profile-overlay": render_profile_overlay,
}


def render(recipe: dict) -> str:
    """Render one figure; returns the output path.  The input table is
    opened read-only and nothing is written on error."""
    kind = recipe.get("kind")
    if kind not in KINDS:
        raise RecipeError(f"kind must be one of {KINDS}, got {kind!r}")
    for key in ("input", "out"):
        if key not in recipe:
            raise RecipeError(f"recipe is missing the {key!r} key")
    columns, rows = read_table(str(recipe["input"]))
    _require_rows(rows, recipe["input"])
    fig = RENDERERS[kind](recipe, columns, rows)
    out = str(recipe["out"])
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, metadata={"Software": "dgfchain-plots"})
    plt.close(fig)
    return out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--recipe", required=True)
    ap.add_argument("overrides", nargs="*",
                    help="key=value pairs overriding recipe entries")
    args = ap.parse_args(argv)
    try:
        recipe = load_keyvalues(args.recipe)
        for ov in args.overrides:
            key, _, val = ov.partition("=")
            recipe[key] = val
        out = render(recipe)
    except (RecipeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
