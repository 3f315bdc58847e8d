"""Plot-ready exports: delimited convergence data and rendered figures.

Every stage writes a CSV a plotting script (or spreadsheet) can consume
directly, and a PNG rendered headlessly next to it. CSV content is fully
determined by the optimization history, so repeated runs produce
identical files; figures are a convenience view of the same data.
"""

import csv

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def history_candidate_rows(history):
    """Long-format rows (iter, phase, fevals, candidate, f, best_f)."""
    rows = []
    for rec in history:
        for i, cand in enumerate(rec["candidates"]):
            rows.append([rec["iter"], rec["phase"], rec["fevals"], i, cand["f"], rec["best_f"]])
    return rows


def best_x_trajectory(history):
    """Best-so-far candidate vector after each iteration."""
    best_f = float("inf")
    best_x = None
    out = []
    for rec in history:
        for cand in rec["candidates"]:
            if cand["f"] < best_f:
                best_f = cand["f"]
                best_x = cand["x_scaled"]
        out.append((rec["iter"], best_x, best_f))
    return out


def scaled_to_value(s, quantity):
    return quantity.min_val + (min(max(s, -1.0), 1.0) + 1.0) * (quantity.max_val - quantity.min_val) / 2.0


def export_convergence(history, csv_path, fig_path, title, ylabel="objective"):
    """Per-candidate CSV plus a best-so-far convergence figure."""
    write_csv(csv_path, ["iter", "phase", "fevals", "candidate", "f", "best_f"],
              history_candidate_rows(history))
    fig, ax = plt.subplots(figsize=(6, 4))
    for rec in history:
        fs = [c["f"] for c in rec["candidates"]]
        ax.plot([rec["fevals"]] * len(fs), fs, ".", color="0.7", markersize=3)
    ax.plot([r["fevals"] for r in history], [r["best_f"] for r in history],
            "-o", color="C0", markersize=3, label="best so far")
    ax.set_xlabel("function evaluations")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    if all(r["best_f"] > 0 for r in history):
        ax.set_yscale("log")
    ax.legend()
    fig.tight_layout()
    fig.savefig(fig_path, dpi=150)
    plt.close(fig)


def export_learning_trajectory(history, quantity, param_label, csv_path, fig_path,
                               truth=None):
    """Learned-parameter trace: CSV (iter, value) plus figure.

    quantity supplies the bounds that map the scaled best-so-far vector
    entry back to plain units; truth draws a reference line when known.
    """
    rows = []
    for iteration, best_x, _ in best_x_trajectory(history):
        if best_x is None:
            continue
        rows.append([iteration, scaled_to_value(best_x[0], quantity)])
    write_csv(csv_path, ["iter", param_label], rows)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot([r[0] for r in rows], [r[1] for r in rows], "-o", markersize=3, label=param_label)
    if truth is not None:
        ax.axhline(truth, color="C3", linestyle="--", label="true value")
    ax.set_xlabel("iteration")
    ax.set_ylabel(param_label)
    ax.set_title("model learning")
    ax.legend()
    fig.tight_layout()
    fig.savefig(fig_path, dpi=150)
    plt.close(fig)
