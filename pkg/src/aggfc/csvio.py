"""CSV and plot-data artifacts.

All floats are written with ``repr``, the shortest representation that round
trips exactly, so identical runs produce byte-identical files.
"""

import csv
import json

import numpy as np

__all__ = [
    "write_params_csv",
    "read_params_csv",
    "write_realization_csv",
    "write_losses_csv",
    "write_summary_csv",
    "write_plot_data",
    "write_weights_csv",
    "write_boxplot_svg",
]


def _fmt(x) -> str:
    return repr(float(x))


def write_params_csv(path, params) -> None:
    """Columns: u, theta_1..theta_d, sigma."""
    d = params.d
    grid = params.grid
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["u"] + [f"theta_{j}" for j in range(1, d + 1)] + ["sigma"])
        for k in range(params.n_points):
            row = [_fmt(grid[k])] + [_fmt(v) for v in params.theta[k]] + [_fmt(params.sigma[k])]
            writer.writerow(row)


def read_params_csv(path):
    """Load parameter paths written by :func:`write_params_csv`.

    The stability margin and the noise-scale band are re-derived from the
    grid itself (tightest admissible values), and validated, so an unstable
    file is rejected here with the offending grid point in the message.
    """
    from .tvar import TvarParams, spectral_radius

    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "u" or header[-1] != "sigma":
            raise ValueError(f"{path}: expected header u, theta_1..theta_d, sigma")
        d = len(header) - 2
        if d < 1 or header[1 : d + 1] != [f"theta_{j}" for j in range(1, d + 1)]:
            raise ValueError(f"{path}: malformed theta columns in header")
        rows = []
        for ln, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != d + 2:
                raise ValueError(f"{path}:{ln}: expected {d + 2} fields, got {len(row)}")
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise ValueError(f"{path}:{ln}: {exc}") from exc
    if len(rows) < 2:
        raise ValueError(f"{path}: need at least two grid rows")
    data = np.asarray(rows)
    u = data[:, 0]
    expected = np.linspace(0.0, 1.0, len(u))
    if not np.allclose(u, expected, atol=1e-9):
        raise ValueError(f"{path}: u column must be an equispaced grid from 0 to 1")
    theta = data[:, 1 : d + 1]
    sigma = data[:, d + 1]
    if np.any(sigma < 0):
        raise ValueError(f"{path}: sigma column must be nonnegative")
    delta = 1e-6
    for k in range(theta.shape[0]):
        rad = spectral_radius(theta[k])
        if rad >= 1.0:
            raise ValueError(
                f"{path}: theta at u={u[k]:.6g} is unstable (spectral radius {rad:.6g} >= 1)"
            )
        delta = max(delta, rad)
    s_hi = float(np.max(sigma))
    return TvarParams(
        theta=theta,
        sigma=sigma,
        delta=delta,
        rho=float(np.min(sigma)) / s_hi if s_hi > 0 else 0.0,
        sigma_plus=s_hi if s_hi > 0 else 1.0,
    )


def write_realization_csv(path, realization) -> None:
    """Columns: t, x, sigma_t."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "x", "sigma_t"])
        for t in range(realization.T):
            writer.writerow([t + 1, _fmt(realization.x[t]), _fmt(realization.sigma_trace[t])])


def write_losses_csv(path, report) -> None:
    """Per-replication records. Columns: replication, predictor_id, L_T."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["replication", "predictor_id", "L_T"])
        for k, r in enumerate(report.replication_ids):
            for j, pid in enumerate(report.predictor_ids):
                writer.writerow([int(r), pid, _fmt(report.losses[k, j])])


def write_summary_csv(path, report) -> None:
    """Five-number summary. Columns: predictor_id, min, q25, median, q75, max."""
    five = report.five_number()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["predictor_id", "min", "q25", "median", "q75", "max"])
        for pid in report.predictor_ids:
            writer.writerow([pid] + [_fmt(v) for v in five[pid]])


def write_plot_data(path, report) -> None:
    """Boxplot-ready JSON: predictor id -> {min, q25, median, q75, max}."""
    five = report.five_number()
    payload = {
        pid: dict(zip(("min", "q25", "median", "q75", "max"), five[pid]))
        for pid in report.predictor_ids
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_weights_csv(path, weight_trace) -> None:
    """Aggregation weight trajectory. Columns: t, alpha_1..alpha_N."""
    weight_trace = np.asarray(weight_trace, dtype=float)
    T, N = weight_trace.shape
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t"] + [f"alpha_{i}" for i in range(1, N + 1)])
        for t in range(T):
            writer.writerow([t + 1] + [_fmt(v) for v in weight_trace[t]])


def write_boxplot_svg(path, report) -> None:
    """Static boxplot of the per-predictor loss distributions (needs matplotlib)."""
    import matplotlib

    matplotlib.use("SVG")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(1.2 * len(report.predictor_ids) + 2, 4))
    ax.boxplot(
        [report.column(pid) for pid in report.predictor_ids],
        tick_labels=list(report.predictor_ids),
        whis=(0, 100),
    )
    ax.axhline(0.0, lw=0.5, color="grey")
    ax.set_ylabel("averaged shifted loss")
    ax.tick_params(axis="x", rotation=45)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
