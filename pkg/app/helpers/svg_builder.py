#!/usr/bin/env python3
# -*- coding: utf-8 -*-

from typing import Dict, List, Optional, Sequence, Tuple

from lxml import etree

from app.helpers.exceptions import InvalidParameter, PSLException
from app.helpers.spectra import PSLRecord

CHANNELS = ("betti", "lambda")
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


class NoData(PSLException):
    """Exception raised when there is nothing to plot."""

    exit_code = 10


class SVGBuilder(object):
    """Builds a standalone SVG 1.1 line chart."""

    XML_ENCODING = "UTF-8"
    NAMESPACES = {None: "http://www.w3.org/2000/svg"}
    WIDTH = 640
    HEIGHT = 400
    LEFT, RIGHT, TOP, BOTTOM = 70, 120, 40, 50

    def __init__(self, x_range: Tuple[float, float], y_range: Tuple[float, float]):
        self.x_min, self.x_max = x_range
        self.y_min, self.y_max = y_range
        if self.x_max <= self.x_min:
            self.x_min, self.x_max = self.x_min - 0.5, self.x_min + 0.5
        if self.y_max <= self.y_min:
            self.y_max = self.y_min + 1.0
        self.xml = etree.Element(
            "svg",
            nsmap=self.NAMESPACES,
            version="1.1",
            width=str(self.WIDTH),
            height=str(self.HEIGHT),
            viewBox=f"0 0 {self.WIDTH} {self.HEIGHT}",
        )
        etree.SubElement(
            self.xml, "rect", width="100%", height="100%", fill="white"
        )
        self._legend_rows = 0

    def x(self, value: float) -> float:
        span = self.WIDTH - self.LEFT - self.RIGHT
        return self.LEFT + (value - self.x_min) / (self.x_max - self.x_min) * span

    def y(self, value: float) -> float:
        span = self.HEIGHT - self.TOP - self.BOTTOM
        return self.HEIGHT - self.BOTTOM - (value - self.y_min) / (self.y_max - self.y_min) * span

    def _text(self, x: float, y: float, text: str, **attributes) -> None:
        element = etree.SubElement(
            self.xml, "text", x=f"{x:.2f}", y=f"{y:.2f}", **attributes
        )
        element.set("font-family", "sans-serif")
        element.set("font-size", "12")
        element.text = text

    def title(self, text: str) -> None:
        self._text(self.WIDTH / 2, self.TOP / 2 + 4, text, **{"text-anchor": "middle"})

    def axes(self, x_label: str, y_label: str, y_ticks: Sequence[float]) -> None:
        group = etree.SubElement(self.xml, "g", id="axes", stroke="black")
        bottom, left = self.y(self.y_min), self.x(self.x_min)
        etree.SubElement(
            group, "line", x1=f"{left:.2f}", y1=f"{bottom:.2f}",
            x2=f"{self.x(self.x_max):.2f}", y2=f"{bottom:.2f}",
        )
        etree.SubElement(
            group, "line", x1=f"{left:.2f}", y1=f"{bottom:.2f}",
            x2=f"{left:.2f}", y2=f"{self.y(self.y_max):.2f}",
        )
        for i in range(6):
            value = self.x_min + i * (self.x_max - self.x_min) / 5
            self._text(self.x(value), bottom + 18, f"{value:.3g}", **{"text-anchor": "middle"})
        for value in y_ticks:
            self._text(left - 8, self.y(value) + 4, f"{value:.3g}", **{"text-anchor": "end"})
        self._text(
            (left + self.x(self.x_max)) / 2, self.HEIGHT - 12, x_label,
            **{"text-anchor": "middle"},
        )
        self._text(
            16, (bottom + self.y(self.y_max)) / 2, y_label,
            transform=f"rotate(-90 16 {(bottom + self.y(self.y_max)) / 2:.2f})",
            **{"text-anchor": "middle"},
        )

    def series(
        self,
        points: Sequence[Tuple[float, Optional[float]]],
        label: str,
        color: str,
        step: bool,
    ) -> etree._Element:
        """Adds one series; a None value breaks a line series."""
        commands: List[str] = []
        markers: List[Tuple[float, float]] = []
        previous = None
        run = 0
        for x_value, y_value in points:
            if y_value is None:
                if run == 1:
                    markers.append(previous)
                previous, run = None, 0
                continue
            x, y = self.x(x_value), self.y(y_value)
            if previous is None:
                commands.append(f"M{x:.2f},{y:.2f}")
            elif step:
                commands.append(f"H{x:.2f} V{y:.2f}")
            else:
                commands.append(f"L{x:.2f},{y:.2f}")
            previous, run = (x, y), run + 1
        if run == 1:
            markers.append(previous)
        path = etree.SubElement(
            self.xml, "path", d=" ".join(commands), fill="none", stroke=color
        )
        path.set("class", "series")
        path.set("stroke-width", "2")
        path.set("data-label", label)
        for x, y in markers:
            etree.SubElement(self.xml, "circle", cx=f"{x:.2f}", cy=f"{y:.2f}", r="3", fill=color)
        legend_y = self.TOP + 16 * self._legend_rows
        legend_x = self.WIDTH - self.RIGHT + 12
        etree.SubElement(
            self.xml, "line", x1=f"{legend_x:.2f}", y1=f"{legend_y:.2f}",
            x2=f"{legend_x + 18:.2f}", y2=f"{legend_y:.2f}", stroke=color,
        )
        self._text(legend_x + 24, legend_y + 4, label)
        self._legend_rows += 1
        return path

    def to_string(self, pretty=True) -> str:
        return etree.tostring(
            self.xml,
            pretty_print=pretty,
            encoding=self.XML_ENCODING,
            xml_declaration=True,
        ).decode("utf-8")


def emit_svg(records: Sequence[PSLRecord], channel: str, q: int) -> str:
    """Plots betti (as a step plot) or lambda_min (as a line plot) against t,
    one series per p, for the records of dimension q.

    Raises:
        InvalidParameter -- If the channel is not one of CHANNELS.
        NoData -- If no record of dimension q has a value on the channel.
    """
    if channel not in CHANNELS:
        raise InvalidParameter(f"Unknown channel '{channel}'", channel=channel)
    selected = sorted((r for r in records if r.q == q), key=PSLRecord.sort_key)

    def value(record: PSLRecord) -> Optional[float]:
        return float(record.betti) if channel == "betti" else record.lambda_min

    values = [value(r) for r in selected if value(r) is not None]
    if not values:
        raise NoData(f"No {channel} data for q={q}", channel=channel, q=q)

    by_p: Dict[float, List[Tuple[float, Optional[float]]]] = {}
    for record in selected:
        by_p.setdefault(record.p, []).append((record.t, value(record)))
    ts = [r.t for r in selected]
    if channel == "betti":
        top = max(values) + 1
        y_ticks = list(range(0, int(top) + 1)) if top <= 10 else [top * i / 5 for i in range(6)]
        y_label = f"beta_{q}"
    else:
        top = max(values) * 1.1
        y_ticks = [top * i / 5 for i in range(6)]
        y_label = f"lambda_{q}"

    builder = SVGBuilder((min(ts), max(ts)), (0.0, top))
    builder.title(f"{y_label} against t")
    builder.axes("t", y_label, y_ticks)
    for i, (p, points) in enumerate(sorted(by_p.items())):
        builder.series(points, f"p={p:g}", COLORS[i % len(COLORS)], step=channel == "betti")
    return builder.to_string()
