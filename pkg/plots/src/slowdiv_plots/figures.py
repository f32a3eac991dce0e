"""The five figure kinds and the artifact each one consumes.

Builders take CSV paths and return a matplotlib Figure; they use the
object-oriented API only, so no GUI backend is ever touched.  Nothing is
recomputed here: fitted dimensions, multipliers and so on are plotted only
if the artifact contains them.  The one derived number is the raw log-log
slope drawn as a guide line in the dimension figure, labelled as such.
"""

import os

import numpy as np
from matplotlib.figure import Figure

from .errors import PlotDataError
from .io import column, read_table


def fig_sdi_curve(path):
    """Cycle integral I(s) and slow relation G(s) from sdi_curve.csv."""
    tab = read_table(path, numeric=("s", "I_s", "G_s", "residual"))
    s = column(tab, "s")
    fig = Figure(figsize=(8.0, 3.4))
    ax_i, ax_g = fig.subplots(1, 2)

    ax_i.axhline(0.0, color="0.7", lw=0.8)
    ax_i.plot(s, column(tab, "I_s"), "o-", ms=3, color="tab:blue")
    ax_i.set_xlabel("section offset s")
    ax_i.set_ylabel("I(s)")
    ax_i.set_title("cycle integral")

    ax_g.plot(s, s, "--", color="0.7", lw=0.8, label="identity")
    ax_g.plot(s, column(tab, "G_s"), "o-", ms=3, color="tab:orange", label="G(s)")
    ax_g.set_xlabel("s")
    ax_g.set_ylabel("G(s)")
    ax_g.set_title("slow relation")
    ax_g.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    return fig


def fig_cobweb(path, max_steps=400):
    """Staircase of the orbit s_0, s_1, ... from orbit.csv."""
    tab = read_table(path, numeric=("n", "s_n"))
    terms = column(tab, "s_n")
    fig = Figure(figsize=(8.0, 3.4))
    ax_web, ax_decay = fig.subplots(1, 2)

    lo, hi = float(terms.min()), float(terms.max())
    ax_web.plot([lo, hi], [lo, hi], "--", color="0.7", lw=0.8)
    steps = terms[: max_steps + 1]
    xs, ys = [steps[0]], [steps[0]]
    for a, b in zip(steps[:-1], steps[1:]):
        xs += [a, b]
        ys += [b, b]
    ax_web.plot(xs, ys, color="tab:blue", lw=0.7)
    ax_web.plot(steps[:-1], steps[1:], ".", ms=3, color="tab:red")
    ax_web.set_xlabel("s_n")
    ax_web.set_ylabel("s_{n+1}")
    ax_web.set_title("orbit staircase")

    positive = terms[terms > 0.0]
    ax_decay.semilogy(np.arange(positive.size), positive, lw=0.9, color="tab:blue")
    ax_decay.set_xlabel("n")
    ax_decay.set_ylabel("s_n")
    ax_decay.set_title("decay toward the floor")
    fig.tight_layout()
    return fig


def fig_dimension_fit(path):
    """log-log covering measure against box size from dimension.csv."""
    tab = read_table(path, numeric=("delta", "measure"))
    delta = column(tab, "delta")
    measure = column(tab, "measure")
    keep = (delta > 0.0) & (measure > 0.0)
    if not np.any(keep):
        raise PlotDataError(f"{path}: no positive (delta, measure) pairs to plot")
    delta, measure = delta[keep], measure[keep]

    fig = Figure(figsize=(4.6, 3.6))
    ax = fig.subplots()
    ax.loglog(delta, measure, "o", ms=3, color="tab:blue")
    if delta.size >= 2:
        slope, intercept = np.polyfit(np.log(delta), np.log(measure), 1)
        guide = np.exp(intercept) * delta**slope
        ax.loglog(delta, guide, "-", lw=0.9, color="tab:red",
                  label=f"raw log-log slope {slope:.3f}")
        ax.legend(frameon=False, fontsize=8)
    ax.set_xlabel("box size delta")
    ax.set_ylabel("covering measure")
    ax.set_title("dimension fit data")
    fig.tight_layout()
    return fig


def fig_phase_portrait(path, crossings_path=None):
    """Orbit in the (x, y) plane from trajectory.csv, boundary at y = 0.

    Section crossings are overlaid when crossings.csv is given or found
    next to the trajectory file.
    """
    tab = read_table(path, numeric=("t", "x", "y"))
    x, y = column(tab, "x"), column(tab, "y")
    fig = Figure(figsize=(5.4, 4.0))
    ax = fig.subplots()
    ax.axhline(0.0, color="0.4", lw=1.0)
    ax.plot(x, y, lw=0.7, color="tab:blue")
    ax.plot([x[0]], [y[0]], "o", ms=5, color="tab:green", label="start")

    if crossings_path is None:
        candidate = os.path.join(os.path.dirname(path), "crossings.csv")
        crossings_path = candidate if os.path.exists(candidate) else ""
    if crossings_path:
        cross = read_table(crossings_path, numeric=("t", "x", "y", "s"))
        ax.plot(column(cross, "x"), column(cross, "y"), "x", ms=5,
                color="tab:red", label="section crossings")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title("regularized flow")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    return fig


def fig_bifurcation(path):
    """Cycle count against the unfolding parameter from sweep.csv.

    History rows carry (lamt, count); the summary row, when present,
    carries the refined parameter value with the closest cycle's offset,
    multiplier and classification, drawn as a vertical marker.
    """
    tab = read_table(
        path,
        numeric=("lamt", "count", "s_star", "multiplier"),
        text=("classification",),
        blank_ok=("count", "s_star", "multiplier"),
    )
    history = [(l, c) for l, c in zip(tab["lamt"], tab["count"]) if c is not None]
    if not history:
        raise PlotDataError(f"{path}: no history rows with a cycle count")
    lamt, count = map(np.asarray, zip(*sorted(history)))

    fig = Figure(figsize=(5.4, 3.6))
    ax = fig.subplots()
    ax.step(lamt, count, where="mid", color="tab:blue", lw=0.9)
    ax.plot(lamt, count, "o", ms=4, color="tab:blue")
    ax.set_xlabel("lamt")
    ax.set_ylabel("cycle count")
    ax.set_yticks(range(int(max(count)) + 2))
    ax.set_title("cycle count across the sweep")

    for l, c, s_star, mult, cls in zip(
        tab["lamt"], tab["count"], tab["s_star"], tab["multiplier"],
        tab["classification"],
    ):
        if c is None and s_star is not None:
            ax.axvline(l, color="tab:red", lw=1.0, ls="--")
            ax.annotate(
                f"{cls or 'cycle'}\nmultiplier {mult:.4f}" if mult is not None
                else (cls or "cycle"),
                xy=(l, max(count) / 2.0), fontsize=8, color="tab:red",
                xytext=(4, 0), textcoords="offset points",
            )
    fig.tight_layout()
    return fig


# figure kind -> (builder, default artifact file names in a run directory)
KINDS = {
    "sdiCurve": (fig_sdi_curve, ("sdi_curve.csv",)),
    "cobweb": (fig_cobweb, ("orbit.csv",)),
    "dimensionFit": (fig_dimension_fit, ("dimension.csv",)),
    "phasePortrait": (fig_phase_portrait, ("trajectory.csv",)),
    "bifurcation": (fig_bifurcation, ("sweep.csv",)),
}


def render(kind, directory, out_path=None, dpi=150):
    """Build one figure kind from its default artifact in a run directory.

    Returns the path the PNG was written to.
    """
    if kind not in KINDS:
        raise PlotDataError(
            f"unknown figure kind '{kind}' (choose from {', '.join(sorted(KINDS))})"
        )
    builder, files = KINDS[kind]
    fig = builder(*(os.path.join(directory, f) for f in files))
    if out_path is None:
        out_path = os.path.join(directory, f"{kind}.png")
    fig.savefig(out_path, dpi=dpi)
    return out_path
