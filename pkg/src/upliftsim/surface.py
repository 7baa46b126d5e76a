"""Noiseless response surfaces on a regular lattice, as CSV or SVG."""

from __future__ import annotations

from typing import Mapping

import numpy as np

from .bases import write_grid_csv
from .drift import eval_drift
from .environment import EnvironmentConfig

TREATED_RGB = (46, 160, 67)
CONTROL_RGB = (214, 39, 40)


def lattice_axes(config: EnvironmentConfig, res: int, slices: Mapping[int, float] | None = None):
    """One axis per domain dimension; sliced dimensions collapse to a single node."""
    if res < 2:
        raise ValueError(f"grid resolution must be >= 2, got {res}")
    slices = dict(slices or {})
    m = config.policy.m_domain
    for j in slices:
        if not 0 <= j < m:
            raise ValueError(f"slice dimension {j} outside [0, {m - 1}]")
    low, high = config.policy.domain_box()
    return tuple(
        np.array([float(slices[j])]) if j in slices else np.linspace(low[j], high[j], res)
        for j in range(m)
    )


def compute_surface(config: EnvironmentConfig, arm: int, t: int, res: int,
                    slices: Mapping[int, float] | None = None):
    """Return ``(axes, values)`` with ``values[i0, i1, ...] = b_arm(x', d(t))``."""
    if not 0 <= arm < config.n_arms:
        raise ValueError(f"arm must be in [0, {config.n_arms - 1}], got {arm}")
    axes = lattice_axes(config, res, slices)
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    values = np.asarray(config.response(arm, mesh, eval_drift(config.drift, t)), dtype=float)
    return axes, values.reshape(mesh.shape[:-1])


def write_surface_csv(path, config: EnvironmentConfig, arm: int, t: int, res: int,
                      slices: Mapping[int, float] | None = None) -> None:
    axes, values = compute_surface(config, arm, t, res, slices)
    write_grid_csv(path, axes, values)


def _rgb(c) -> str:
    return "#%02x%02x%02x" % tuple(int(round(v)) for v in c)


def render_svg(config: EnvironmentConfig, arm: int, t: int, res: int, size: int = 404) -> str:
    """Overlay the treated arm (green) on the control arm (red).

    For M = 2 each lattice cell mixes the two colours by the respective
    response; for M = 1 both curves are drawn. The control arm is 0, or 1
    when ``arm`` itself is the control.
    """
    m = config.policy.m_domain
    if m > 2:
        raise ValueError("SVG output needs M <= 2")
    other = 1 if arm == 0 else 0
    axes, treated = compute_surface(config, arm, t, res)
    _, control = compute_surface(config, other, t, res)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f"<title>b_{arm} (green) over b_{other} (red), t={t}</title>",
    ]
    if m == 2:
        cell = size / res
        for i in range(res):
            for j in range(res):
                g, r = treated[i, j], control[i, j]
                colour = (
                    r * CONTROL_RGB[0] + g * TREATED_RGB[0],
                    r * CONTROL_RGB[1] + g * TREATED_RGB[1],
                    r * CONTROL_RGB[2] + g * TREATED_RGB[2],
                )
                colour = tuple(min(255.0, c) for c in colour)
                # y axis points up
                parts.append(
                    f'<rect x="{i * cell:.3f}" y="{size - (j + 1) * cell:.3f}" '
                    f'width="{cell:.3f}" height="{cell:.3f}" fill="{_rgb(colour)}"/>'
                )
    else:
        xs = np.linspace(0, size, res)
        for values, colour in ((control, CONTROL_RGB), (treated, TREATED_RGB)):
            pts = " ".join(f"{x:.3f},{size - v * size:.3f}" for x, v in zip(xs, values))
            parts.append(f'<polyline fill="none" stroke="{_rgb(colour)}" stroke-width="2" points="{pts}"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
