"""
Minimal deterministic SVG line plots of result CSV columns.

Fixed 800x500 viewport, linear axes, labels taken from column names. Coordinates
are printed with two decimals so identical input gives byte-identical output.
"""
import csv
import math
import logging
from xml.sax.saxutils import escape
from typing import Dict, List, Optional, Sequence

from .errors import PlotError, ResultIOError

logger = logging.getLogger(__name__)

WIDTH = 800
HEIGHT = 500
MARGIN_LEFT = 80
MARGIN_RIGHT = 80
MARGIN_TOP = 30
MARGIN_BOTTOM = 60
TICKS = 5
COLORS = ("#1f4e9c", "#c0392b")


def read_columns(path: str) -> Dict[str, List[float]]:
    """Numeric columns of a CSV file keyed by header name"""
    try:
        with open(path, "r", encoding="utf-8", newline="") as f:
            reader = csv.reader(f)
            rows = [(reader.line_num, row) for row in reader]
    except OSError as e:
        raise ResultIOError(f"cannot read {path}: {e}") from e
    except csv.Error as e:
        raise PlotError(f"malformed CSV: {e}") from e
    if not rows or not any(cell.strip() for cell in rows[0][1]):
        raise PlotError("missing header row", line=1)

    header = [name.strip() for name in rows[0][1]]
    columns: Dict[str, List[float]] = {name: [] for name in header}
    for number, cells in rows[1:]:
        if not any(cell.strip() for cell in cells):
            continue
        if len(cells) != len(header):
            raise PlotError(f"expected {len(header)} fields, found {len(cells)}", line=number)
        for name, cell in zip(header, cells):
            try:
                columns[name].append(float(cell))
            except ValueError:
                raise PlotError(f"non-numeric value {cell!r} in column '{name}'", line=number)
    return columns


def _range(values: Sequence[float]):
    finite = [v for v in values if math.isfinite(v)]
    if not finite:
        return 0.0, 1.0
    low, high = min(finite), max(finite)
    if high == low:
        pad = abs(high) * 0.05 or 0.5
        return low - pad, high + pad
    return low, high


def _label(value: float) -> str:
    return f"{value:.4g}"


class SVGBuilder:
    def __init__(self, width: int = WIDTH, height: int = HEIGHT):
        self.width = width
        self.height = height
        self.svg = (f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" '
                    f'height="{height}" viewBox="0 0 {width} {height}">\n'
                    f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>\n')

    def line(self, x1, y1, x2, y2, stroke="#000000", extra=""):
        self.svg += (f'<line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" '
                     f'stroke="{stroke}" {extra}/>\n')

    def polyline(self, points, stroke):
        coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in points)
        self.svg += f'<polyline fill="none" stroke="{stroke}" stroke-width="1.5" points="{coords}"/>\n'

    def text(self, x, y, string, anchor="middle", extra=""):
        self.svg += f'<text x="{x:.2f}" y="{y:.2f}" font-size="13" text-anchor="{anchor}" {extra}>{escape(str(string))}</text>\n'

    def get_svg(self) -> str:
        return f"{self.svg}</svg>\n"


def render_plot(columns: Dict[str, List[float]], x: str, y: str, y2: Optional[str] = None,
                hline: Optional[float] = None) -> str:
    for name in (x, y, y2):
        if name is not None and name not in columns:
            raise PlotError(f"unknown column '{name}'; available: {', '.join(columns)}")

    xs = columns[x]
    left, right = MARGIN_LEFT, WIDTH - MARGIN_RIGHT
    top, bottom = MARGIN_TOP, HEIGHT - MARGIN_BOTTOM
    x_low, x_high = _range(xs)

    def to_px(value, low, high):
        return left + (value - low) / (high - low) * (right - left)

    def to_py(value, low, high):
        return bottom - (value - low) / (high - low) * (bottom - top)

    y_values = list(columns[y]) + ([hline] if hline is not None else [])
    y_low, y_high = _range(y_values)

    svg = SVGBuilder()
    svg.line(left, bottom, right, bottom)
    svg.line(left, bottom, left, top)
    for k in range(TICKS + 1):
        fraction = k / TICKS
        xv = x_low + fraction * (x_high - x_low)
        px = left + fraction * (right - left)
        svg.line(px, bottom, px, bottom + 5)
        svg.text(px, bottom + 20, _label(xv))
        yv = y_low + fraction * (y_high - y_low)
        py = bottom - fraction * (bottom - top)
        svg.line(left - 5, py, left, py)
        svg.text(left - 8, py + 4, _label(yv), anchor="end")
    svg.text((left + right) / 2, HEIGHT - 15, x)
    svg.text(20, (top + bottom) / 2, y, extra=f'transform="rotate(-90 20 {(top + bottom) / 2:.2f})"')

    points = [(to_px(a, x_low, x_high), to_py(b, y_low, y_high))
              for a, b in zip(xs, columns[y]) if math.isfinite(a) and math.isfinite(b)]
    svg.polyline(points, COLORS[0])

    if hline is not None:
        py = to_py(hline, y_low, y_high)
        svg.line(left, py, right, py, stroke="#777777", extra='stroke-dasharray="6,4"')

    if y2 is not None:
        y2_low, y2_high = _range(columns[y2])
        svg.line(right, bottom, right, top, stroke=COLORS[1])
        for k in range(TICKS + 1):
            fraction = k / TICKS
            yv = y2_low + fraction * (y2_high - y2_low)
            py = bottom - fraction * (bottom - top)
            svg.line(right, py, right + 5, py, stroke=COLORS[1])
            svg.text(right + 8, py + 4, _label(yv), anchor="start")
        mid = (top + bottom) / 2
        svg.text(WIDTH - 15, mid, y2, extra=f'transform="rotate(90 {WIDTH - 15} {mid:.2f})"')
        points = [(to_px(a, x_low, x_high), to_py(b, y2_low, y2_high))
                  for a, b in zip(xs, columns[y2]) if math.isfinite(a) and math.isfinite(b)]
        svg.polyline(points, COLORS[1])

    logger.debug(f"📊 Plotted {y} against {x}, {len(xs)} rows")
    return svg.get_svg()
