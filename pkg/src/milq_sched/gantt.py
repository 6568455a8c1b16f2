"""Static SVG Gantt rendering of schedules.

One horizontal lane per machine, scaled to its qubit capacity; one
rectangle per job spanning [start, completion), with height proportional
to its qubit usage and a vertical position chosen by a first-fit skyline
within the lane.  Output is deterministic for a fixed schedule.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

from .core import Instance, Schedule

_QUBIT_PX = 14
_LANE_GAP = 18
_MARGIN_LEFT = 90
_MARGIN_TOP = 40
_MARGIN_RIGHT = 30
_MARGIN_BOTTOM = 30
_CHART_WIDTH = 780

_PALETTE = (
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
    "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
)


def _tick_step(span: float) -> float:
    if span <= 10:
        return 1.0
    if span <= 30:
        return 5.0
    if span <= 120:
        return 10.0
    return max(1.0, round(span / 10))


def _lane_offsets(
    entries: list, instance: Instance
) -> dict[str, int]:
    """First-fit vertical qubit offsets within one machine lane."""
    offsets: dict[str, int] = {}
    active: list[tuple[int, int, float, str]] = []  # (offset, qubits, completion, job)
    for e in sorted(entries, key=lambda e: (e.start, e.job)):
        active = [a for a in active if a[2] > e.start]
        q = instance.job(e.job).qubits
        capacity = instance.machine(e.machine).capacity
        taken = sorted((a[0], a[0] + a[1]) for a in active)
        offset = 0
        for lo, hi in taken:
            if offset + q <= lo:
                break
            offset = max(offset, hi)
        offset = min(offset, max(0, capacity - q))
        offsets[e.job] = offset
        active.append((offset, q, e.completion, e.job))
    return offsets


def render_gantt(schedule: Schedule, instance: Instance) -> str:
    """Render a schedule to an SVG document string."""
    machines = list(instance.machines)
    span = max(schedule.makespan, 1.0)
    scale = _CHART_WIDTH / span
    lane_heights = {m.id: m.capacity * _QUBIT_PX for m in machines}
    lane_tops: dict[str, int] = {}
    y = _MARGIN_TOP
    for m in machines:
        lane_tops[m.id] = y
        y += lane_heights[m.id] + _LANE_GAP
    height = y - _LANE_GAP + _MARGIN_BOTTOM
    width = _MARGIN_LEFT + _CHART_WIDTH + _MARGIN_RIGHT

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" font-family="sans-serif">',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    for m in machines:
        top = lane_tops[m.id]
        parts.append(
            f'<rect x="{_MARGIN_LEFT}" y="{top}" width="{_CHART_WIDTH}" '
            f'height="{lane_heights[m.id]}" fill="#f4f4f4" stroke="#999"/>'
        )
        parts.append(
            f'<text x="{_MARGIN_LEFT - 8}" y="{top + lane_heights[m.id] / 2:.1f}" '
            f'text-anchor="end" font-size="12">{escape(m.id)} '
            f"(Q={instance.machine(m.id).capacity})</text>"
        )
    step = _tick_step(span)
    t = 0.0
    while t <= span + 1e-9:
        x = _MARGIN_LEFT + t * scale
        parts.append(
            f'<line x1="{x:.1f}" y1="{_MARGIN_TOP - 6}" x2="{x:.1f}" '
            f'y2="{height - _MARGIN_BOTTOM + 6}" stroke="#ddd"/>'
        )
        parts.append(
            f'<text x="{x:.1f}" y="{_MARGIN_TOP - 10}" text-anchor="middle" '
            f'font-size="10">{t:g}</text>'
        )
        t += step

    by_machine: dict[str, list] = {}
    for e in schedule.entries:
        by_machine.setdefault(e.machine, []).append(e)
    color_index = {j.id: k % len(_PALETTE) for k, j in enumerate(instance.jobs)}
    for machine_id, entries in sorted(by_machine.items()):
        offsets = _lane_offsets(entries, instance)
        for e in sorted(entries, key=lambda e: (e.start, e.job)):
            q = instance.job(e.job).qubits
            x = _MARGIN_LEFT + e.start * scale
            w = max(1.0, (e.completion - e.start) * scale)
            rect_y = lane_tops[machine_id] + offsets[e.job] * _QUBIT_PX
            h = q * _QUBIT_PX
            color = _PALETTE[color_index.get(e.job, 0)]
            parts.append(
                f'<rect x="{x:.1f}" y="{rect_y}" width="{w:.1f}" height="{h}" '
                f'fill="{color}" fill-opacity="0.85" stroke="#333"/>'
            )
            parts.append(
                f'<text x="{x + w / 2:.1f}" y="{rect_y + h / 2 + 4:.1f}" '
                f'text-anchor="middle" font-size="11">{escape(e.job)}</text>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
