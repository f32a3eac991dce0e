"""Regularized flow, return map, and the CSV-to-figure pipeline.

Runs the toolkit CLI in-process to leave a complete artifact set in
demos/output/flow-run: a stiff trajectory through the switching layer with
its section crossings and return-map samples, the slow-relation curve, the
entry-exit orbit and its dimension data, plus run summaries and a report.
If the slowdiv-plots package is installed the same artifacts are rendered
to PNG without touching the numerics again.

A full saddle-node sweep is deliberately not run here (it takes minutes);
the command line for it is printed at the end.
"""

import json
import os

from slowdiv import cli

out = os.path.join(os.path.dirname(os.path.abspath(__file__)), "output", "flow-run")
os.makedirs(out, exist_ok=True)
print(f"writing artifacts to {out}")

commands = (
    ["simulate", "--model", "builtin:tuned-simple", "--eps", "0.1",
     "--lamt", "3e-4", "--s0", "0.025", "--t-max", "12", "--returns", "3"],
    ["slow-relation", "--model", "builtin:tuned-simple", "--n", "15"],
    ["orbit", "--model", "builtin:tuned-simple", "--s0", "0.02"],
    ["dimension", "--sequence", os.path.join(out, "orbit.csv")],
    ["report"],
)
for argv in commands:
    rc = cli.main(["--out", out, *argv])
    print(f"  slowdiv {argv[0]:13s} -> exit {rc}")
    assert rc == 0

with open(os.path.join(out, "run-simulate.json")) as fh:
    sim = json.load(fh)
print()
print(f"crossings recorded: {sim['results']['crossings']}, "
      f"integrator steps: {sim['results']['diagnostics']['steps']}")
with open(os.path.join(out, "run-dimension.json")) as fh:
    dim = json.load(fh)
print(f"orbit dimension from the artifact chain: {dim['results']['d']:.4f}")

print()
try:
    from slowdiv_plots import KINDS, render
except ImportError:
    print("slowdiv-plots is not installed; skipping the figures")
    print("install it with: pip install --no-build-isolation -e plots/")
else:
    for kind, (_, files) in sorted(KINDS.items()):
        if os.path.exists(os.path.join(out, files[0])):
            print(f"rendered {render(kind, out)}")

print()
print("for the saddle-node sweep (a few minutes), run:")
print(f"  slowdiv --out {out} sweep --model builtin:tuned-simple "
      "--eps 0.05 --lamt-lo 2.6e-4 --lamt-hi 2.9e-4 --bracket-tol 1e-6")
print(f"  slowdiv-plots bifurcation --dir {out}")
