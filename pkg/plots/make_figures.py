#!/usr/bin/env python3
"""Reproduce the paper-style figures end to end: run the CLI configs, then
render every shipped recipe from the emitted tables.

    python plots/make_figures.py [--quick] [--only fig3d fig4b ...]

--quick shrinks lattice sizes and grids (same table schema) so the whole
pipeline finishes in minutes on a laptop; without it the phase-diagram
sweeps reproduce the full published grids and can run for hours.
"""

from __future__ import annotations

import argparse
import subprocess
import sys
from pathlib import Path

PLOTS = Path(__file__).resolve().parent
REPO = PLOTS.parent
OUT = REPO / "out"

# name -> (cli args, quick overrides, recipes consuming the outputs)
STEPS: dict[str, tuple[list[str], list[str], list[str]]] = {
    "fig2a": (["spectrum", "--config", "configs/fig2a.cfg",
               "--out", "out/fig2a.csv"],
              ["--L", "16"], ["fig2a.recipe"]),
    "fig3a": (["spectrum", "--config", "configs/fig3a.cfg",
               "--out", "out/fig3a.csv", "--corr-out", "out/fig3a_corr.csv"],
              ["--L", "16"], ["fig3a_corr.recipe"]),
    "fig3c": (["phase-diagram", "--config", "configs/fig3c.cfg",
               "--out", "out/fig3c.csv"],
              ["--nx", "10", "--ny", "10"], ["fig3c.recipe"]),
    "fig3d": (["phase-diagram", "--config", "configs/fig3d.cfg",
               "--out", "out/fig3d.csv"],
              ["--nx", "10", "--ny", "10"], ["fig3d.recipe"]),
    "fig3e": (["phase-diagram", "--config", "configs/fig3e.cfg",
               "--out", "out/fig3e.csv"],
              ["--nx", "5", "--ny", "5", "--L", "8"], ["fig3e.recipe"]),
    "fig4a": (["phase-diagram", "--config", "configs/fig4a.cfg",
               "--out", "out/fig4a.csv"],
              ["--nx", "5", "--ny", "5", "--L", "8"], ["fig4a.recipe"]),
    "fig4b": (["dynamics", "--config", "configs/fig4b.cfg",
               "--out", "out/fig4b.csv", "--final-corr-out", "out/fig4c_corr.csv"],
              ["--L", "16", "--tmax", "60", "--init-up", "7", "--init-dn", "9"],
              ["fig4b.recipe", "fig4c_corr.recipe"]),
    "fig4d": (["dynamics", "--config", "configs/fig4d.cfg",
               "--out", "out/fig4d.csv", "--avg-out", "out/fig4e_avg.csv"],
              ["--L", "16", "--tmax", "60", "--init-up", "7", "--init-dn", "9",
               "--window", "30", "60"],
              ["fig4d.recipe"]),
    "figS2b": (["meanfield", "--config", "configs/figS2b.cfg",
                "--out", "out/figS2b.csv"],
               [], ["figS2b_profiles.recipe", "figS2b_spectrum.recipe"]),
    "figS6c": (["multiparticle", "--config", "configs/figS6c.cfg",
                "--out", "out/figS6c.csv",
                "--top-state-corr", "out/figS6c_corr.csv"],
               ["--L", "8"], ["figS6c_corr.recipe"]),
}


def run(cmd: list[str]) -> None:
    print("+", " ".join(cmd), flush=True)
    res = subprocess.run(cmd, cwd=REPO)
    if res.returncode != 0:
        raise SystemExit(res.returncode)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--quick", action="store_true")
    ap.add_argument("--only", nargs="*", default=None)
    args = ap.parse_args(argv)
    OUT.mkdir(exist_ok=True)
    names = args.only if args.only else list(STEPS)
    for name in names:
        if name not in STEPS:
            print(f"unknown step {name!r}; choices: {', '.join(STEPS)}",
                  file=sys.stderr)
            return 2
        cli, quick, recipes = STEPS[name]
        cmd = [sys.executable, "-m", "dgfchain.cli"] + cli
        if args.quick:
            cmd += quick
        run(cmd)
        for recipe in recipes:
            run([sys.executable, str(PLOTS / "render.py"),
                 "--recipe", str(PLOTS / "recipes" / recipe)])
    return 0


if __name__ == "__main__":
    sys.exit(main())
