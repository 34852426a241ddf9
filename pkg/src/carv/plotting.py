"""Figure output: deterministic SVG reach-tube drawings and matplotlib reports.

The SVG path is hand-rendered with fixed-precision coordinates and stable
element ordering so identical inputs produce byte-identical files.  The
matplotlib helpers render PNG companions for human consumption alongside the
delimited outputs; those are not byte-stable and carry no contract.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

COLOR_BY_KIND = {
    "initial": "#000000",
    "concrete": "#1f77b4",  # blue
    "symbolic": "#2ca02c",  # green
}
COLOR_VIOLATING = "#ff7f0e"  # orange
COLOR_UNSAFE_REGION = "#bbbbbb"

_FMT = "{:.6f}".format


def _clip_halfplane(poly: list[tuple], a: float, b: float, d: float) -> list[tuple]:
    """Sutherland-Hodgman clip of a polygon against a*x + b*y <= d."""
    out: list[tuple] = []
    n = len(poly)
    for i in range(n):
        p, q = poly[i], poly[(i + 1) % n]
        pin = a * p[0] + b * p[1] <= d
        qin = a * q[0] + b * q[1] <= d
        if pin:
            out.append(p)
        if pin != qin:
            fp = a * p[0] + b * p[1] - d
            fq = a * q[0] + b * q[1] - d
            t = fp / (fp - fq)
            out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
    return out


def render_svg(run_output: dict, proj: tuple[int, int], out_path) -> None:
    """Draw the 2-D projection of a verification run as a standalone SVG."""
    i, j = proj
    result = run_output["result"]
    rsoas = result["rsoas"]
    dim = len(rsoas[0]["lower"])
    if not (0 <= i < dim and 0 <= j < dim and i != j):
        raise ValueError(f"invalid projection indices ({i}, {j}) for dim {dim}")
    constraints = run_output["scenario"]["constraints"]
    failure_time = result.get("failure_time")

    xs: list[float] = []
    ys: list[float] = []
    for r in rsoas:
        xs += [r["lower"][i], r["upper"][i]]
        ys += [r["lower"][j], r["upper"][j]]
    for c in constraints:
        if c["type"] == "disk_avoid" and tuple(c["coords"]) == (i, j):
            xs += [c["center"][0] - c["radius"], c["center"][0] + c["radius"]]
            ys += [c["center"][1] - c["radius"], c["center"][1] + c["radius"]]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    pad_x = 0.05 * max(x1 - x0, 1e-9)
    pad_y = 0.05 * max(y1 - y0, 1e-9)
    x0, x1, y0, y1 = x0 - pad_x, x1 + pad_x, y0 - pad_y, y1 + pad_y

    width, height = 640.0, 480.0
    sx = width / (x1 - x0)
    sy = height / (y1 - y0)

    def tx(x: float) -> str:
        return _FMT((x - x0) * sx)

    def ty(y: float) -> str:
        return _FMT((y1 - y) * sy)  # y grows upward in state space

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{int(width)}" '
        f'height="{int(height)}" viewBox="0 0 {int(width)} {int(height)}">',
        f'<rect x="0" y="0" width="{int(width)}" height="{int(height)}" '
        'fill="#ffffff"/>',
    ]

    # unsafe regions first so sets draw on top
    viewport = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
    for c in constraints:
        if c["type"] == "halfspace":
            normal = c["normal"]
            others = [abs(normal[k]) for k in range(len(normal)) if k not in (i, j)]
            if any(v != 0.0 for v in others):
                continue  # not representable in this projection
            # unsafe side: n . x < offset
            poly = _clip_halfplane(
                viewport, normal[i], normal[j], c["offset"]
            )
            if len(poly) >= 3:
                pts = " ".join(f"{tx(px)},{ty(py)}" for px, py in poly)
                parts.append(
                    f'<polygon points="{pts}" fill="{COLOR_UNSAFE_REGION}" '
                    'fill-opacity="0.6" stroke="none"/>'
                )
        elif c["type"] == "disk_avoid" and tuple(c["coords"]) == (i, j):
            parts.append(
                f'<circle cx="{tx(c["center"][0])}" cy="{ty(c["center"][1])}" '
                f'r="{_FMT(c["radius"] * sx)}" fill="{COLOR_UNSAFE_REGION}" '
                'fill-opacity="0.8" stroke="#666666"/>'
            )

    for r in rsoas:
        color = COLOR_BY_KIND[r["kind"]]
        if failure_time is not None and r["t"] == failure_time:
            color = COLOR_VIOLATING
        w = (r["upper"][i] - r["lower"][i]) * sx
        h = (r["upper"][j] - r["lower"][j]) * sy
        parts.append(
            f'<rect x="{tx(r["lower"][i])}" y="{ty(r["upper"][j])}" '
            f'width="{_FMT(w)}" height="{_FMT(h)}" fill="{color}" '
            f'fill-opacity="0.25" stroke="{color}" stroke-width="1"/>'
        )

    for pt in run_output.get("mc_samples", []):
        parts.append(
            f'<circle cx="{tx(pt[i])}" cy="{ty(pt[j])}" r="1.5" fill="#000000"/>'
        )

    parts.append("</svg>")
    Path(out_path).write_text("\n".join(parts) + "\n")


def render_tube_png(run_output: dict, proj: tuple[int, int], out_path) -> None:
    """Matplotlib rendering of the same projection (not byte-stable)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    from matplotlib.patches import Circle, Rectangle

    i, j = proj
    result = run_output["result"]
    fig, ax = plt.subplots(figsize=(7, 5.5))
    for c in run_output["scenario"]["constraints"]:
        if c["type"] == "disk_avoid" and tuple(c["coords"]) == (i, j):
            ax.add_patch(
                Circle(c["center"], c["radius"], color=COLOR_UNSAFE_REGION, zorder=1)
            )
    for r in result["rsoas"]:
        color = COLOR_BY_KIND[r["kind"]]
        if result.get("failure_time") is not None and r["t"] == result["failure_time"]:
            color = COLOR_VIOLATING
        ax.add_patch(
            Rectangle(
                (r["lower"][i], r["lower"][j]),
                r["upper"][i] - r["lower"][i],
                r["upper"][j] - r["lower"][j],
                facecolor=color,
                alpha=0.25,
                edgecolor=color,
                zorder=2,
            )
        )
    ax.autoscale_view()
    ax.relim()
    ax.set_xlabel(f"state[{i}]")
    ax.set_ylabel(f"state[{j}]")
    ax.set_title(f"{run_output['method']}: reachable tube projection")
    ax.set_aspect("equal", adjustable="datalim")
    ax.margins(0.05)
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)


def render_sweep_png(records: list, xlabel: str, out_path) -> None:
    """Time-vs-parameter figure for a sweep, one line per method; hollow
    markers mark unverified points."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 4.5))
    methods = sorted({r.method for r in records})
    for method in methods:
        pts = [r for r in records if r.method == method]
        pts.sort(key=lambda r: r.parameter)
        xs = [r.parameter for r in pts]
        ys = [r.seconds for r in pts]
        (line,) = ax.plot(xs, ys, "-", label=method)
        ok = [r for r in pts if r.verified]
        bad = [r for r in pts if not r.verified]
        ax.plot(
            [r.parameter for r in ok], [r.seconds for r in ok],
            "o", color=line.get_color(),
        )
        ax.plot(
            [r.parameter for r in bad], [r.seconds for r in bad],
            "o", markerfacecolor="none", color=line.get_color(),
        )
    ax.set_xlabel(xlabel)
    ax.set_ylabel("seconds")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
