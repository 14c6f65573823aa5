"""Minimal self-contained SVG charts: axes, polylines, bars and labels."""
from __future__ import annotations

from typing import Sequence
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 400
MARGIN = dict(left=64, right=16, top=32, bottom=48)
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi == lo:
        return [lo]
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


class _Frame:
    def __init__(self, xlim, ylim, title, xlabel, ylabel):
        self.x0, self.x1 = xlim
        self.y0, self.y1 = ylim
        if self.x1 == self.x0:
            self.x1 = self.x0 + 1.0
        if self.y1 == self.y0:
            self.y1 = self.y0 + 1.0
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
            f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
            f'<text x="{WIDTH / 2}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>',
        ]
        left, bottom = MARGIN["left"], HEIGHT - MARGIN["bottom"]
        right, top = WIDTH - MARGIN["right"], MARGIN["top"]
        self.parts.append(
            f'<path d="M{left},{top} L{left},{bottom} L{right},{bottom}" stroke="black" fill="none"/>'
        )
        for t in _ticks(self.x0, self.x1):
            px = self.px(t)
            self.parts.append(f'<line x1="{px:.2f}" y1="{bottom}" x2="{px:.2f}" y2="{bottom + 4}" stroke="black"/>')
            self.parts.append(f'<text x="{px:.2f}" y="{bottom + 16}" text-anchor="middle">{_fmt(t)}</text>')
        for t in _ticks(self.y0, self.y1):
            py = self.py(t)
            self.parts.append(f'<line x1="{left - 4}" y1="{py:.2f}" x2="{left}" y2="{py:.2f}" stroke="black"/>')
            self.parts.append(f'<text x="{left - 6}" y="{py + 4:.2f}" text-anchor="end">{_fmt(t)}</text>')
        self.parts.append(
            f'<text x="{(left + right) / 2}" y="{HEIGHT - 12}" text-anchor="middle">{escape(xlabel)}</text>'
        )
        self.parts.append(
            f'<text x="16" y="{(top + bottom) / 2}" text-anchor="middle" '
            f'transform="rotate(-90 16 {(top + bottom) / 2})">{escape(ylabel)}</text>'
        )

    def px(self, x: float) -> float:
        span = WIDTH - MARGIN["left"] - MARGIN["right"]
        return MARGIN["left"] + (x - self.x0) / (self.x1 - self.x0) * span

    def py(self, y: float) -> float:
        span = HEIGHT - MARGIN["top"] - MARGIN["bottom"]
        return HEIGHT - MARGIN["bottom"] - (y - self.y0) / (self.y1 - self.y0) * span

    def legend(self, labels: Sequence[str]) -> None:
        for i, label in enumerate(labels):
            y = MARGIN["top"] + 14 + 16 * i
            x = WIDTH - MARGIN["right"] - 150
            color = PALETTE[i % len(PALETTE)]
            self.parts.append(f'<rect x="{x}" y="{y - 9}" width="10" height="10" fill="{color}"/>')
            self.parts.append(f'<text x="{x + 14}" y="{y}">{escape(label)}</text>')

    def render(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def line_chart(x, series: dict, title: str, xlabel: str, ylabel: str) -> str:
    """Polylines of each named series against a shared x axis."""
    ys = [v for vals in series.values() for v in vals]
    frame = _Frame((min(x), max(x)), (min(ys + [0.0]), max(ys + [0.0])), title, xlabel, ylabel)
    for i, (name, vals) in enumerate(series.items()):
        pts = " ".join(f"{frame.px(a):.2f},{frame.py(b):.2f}" for a, b in zip(x, vals))
        color = PALETTE[i % len(PALETTE)]
        frame.parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
    frame.legend(list(series))
    return frame.render()


def bar_chart(categories: Sequence[int], series: dict, title: str, xlabel: str, ylabel: str) -> str:
    """Grouped bars, one group per integer category."""
    ys = [v for vals in series.values() for v in vals]
    lo, hi = min(categories), max(categories)
    frame = _Frame((lo - 0.5, hi + 0.5), (0.0, max(ys + [0.0])), title, xlabel, ylabel)
    k = max(len(series), 1)
    slot = (frame.px(1.0) - frame.px(0.0)) * 0.8
    width = slot / k
    base = frame.py(0.0)
    for i, (name, vals) in enumerate(series.items()):
        color = PALETTE[i % len(PALETTE)]
        for c, v in zip(categories, vals):
            x = frame.px(c) - slot / 2 + i * width
            top = frame.py(v)
            frame.parts.append(
                f'<rect x="{x:.2f}" y="{top:.2f}" width="{width:.2f}" height="{base - top:.2f}" fill="{color}"/>'
            )
    frame.legend(list(series))
    return frame.render()
