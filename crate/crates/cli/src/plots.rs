//! Matplotlib scripts that render figures from the exported tables. They
//! only read data files, so they can be deleted and regenerated freely.

const PRELUDE: &str = r##"import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))


def rows(name):
    with open(os.path.join(HERE, name)) as f:
        return [line.rstrip("\n").split("\t") for line in f if line.strip() and not line.startswith("#")]


def column(table, i):
    return [float(r[i]) for r in table]

"##;

pub fn simulate() -> String {
    format!(
        r##"{PRELUDE}
traj = rows("trajectory.tsv")
spec = rows("spectrum.tsv")
sec = rows("poincare.tsv")

t = column(traj, 0)
mx = column(traj, 7)
# last 50 ms of the retained window
t_end = t[-1]
keep = [i for i, ti in enumerate(t) if ti >= t_end - 0.05]

fig, ax = plt.subplots(1, 3, figsize=(15, 4))
ax[0].plot([t[i] for i in keep], [mx[i] for i in keep], lw=0.8, color="tab:blue")
ax[0].set_xlabel("t (s)")
ax[0].set_ylabel("$M_x$")
ax[1].semilogy(column(spec, 0), [max(a, 1e-12) for a in column(spec, 1)], lw=0.8, color="tab:purple")
ax[1].set_xlabel("frequency (Hz)")
ax[1].set_ylabel("amplitude")
if sec:
    ax[2].scatter(column(sec, 0), column(sec, 1), s=2, color="tab:orange")
ax[2].set_xlabel("$M_x$ at $M_y = 0$")
ax[2].set_ylabel("$M_z$")
fig.tight_layout()
fig.savefig(os.path.join(HERE, "simulate.png"), dpi=150)
"##
    )
}

pub fn phase_diagram() -> String {
    format!(
        r##"{PRELUDE}
from matplotlib.colors import ListedColormap
from matplotlib.patches import Patch

LABELS = ["NoSignal", "LimitCycle", "QuasiPeriodic", "Chaos", "Failed"]
COLORS = ["white", "tab:blue", "tab:purple", "tab:orange", "0.6"]

table = rows("phase_diagram.tsv")
df = sorted(set(column(table, 0)))
gain = sorted(set(column(table, 1)))
grid = [[0] * len(df) for _ in gain]
for r in table:
    grid[gain.index(float(r[1]))][df.index(float(r[0]))] = LABELS.index(r[2])


def edges(v):
    if len(v) == 1:
        return [v[0] - 0.5, v[0] + 0.5]
    mids = [(a + b) / 2 for a, b in zip(v, v[1:])]
    return [2 * v[0] - mids[0]] + mids + [2 * v[-1] - mids[-1]]


fig, ax = plt.subplots(figsize=(7, 5))
ax.pcolormesh(edges(df), edges(gain), grid, cmap=ListedColormap(COLORS), vmin=-0.5, vmax=4.5, edgecolors="0.85", linewidth=0.3)
ax.set_xlabel(r"$\Delta f$ (Hz)")
ax.set_ylabel(r"$\alpha / \alpha_c$")
ax.legend(handles=[Patch(facecolor=c, edgecolor="k", label=l) for l, c in zip(LABELS[:4], COLORS)], loc="upper right", fontsize=8)
fig.tight_layout()
fig.savefig(os.path.join(HERE, "phase_diagram.png"), dpi=150)
"##
    )
}

pub fn robustness() -> String {
    format!(
        r##"{PRELUDE}
table = rows("robustness.tsv")
fig, ax = plt.subplots(figsize=(6, 4))
for name, color in zip(dict.fromkeys(r[0] for r in table), ["tab:blue", "tab:purple", "tab:orange", "0.4"] * 4):
    sub = [r for r in table if r[0] == name]
    ax.errorbar(column(sub, 3), column(sub, 4), yerr=column(sub, 5), marker="o", capsize=3, color=color, label=name)
ax.set_xlabel(r"$\sigma_b$ (nT)")
ax.set_ylabel("Q")
ax.set_ylim(0, 1.05)
ax.legend()
fig.tight_layout()
fig.savefig(os.path.join(HERE, "robustness.png"), dpi=150)
"##
    )
}
