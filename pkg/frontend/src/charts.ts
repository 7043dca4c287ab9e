/** Minimal SVG charts; all statistics come from the stats endpoints. */

import type { FieldSummary, HistogramBin } from "./api.js";

const SVG_NS = "http://www.w3.org/2000/svg";

function svgElement(tag: string, attrs: Record<string, string>): SVGElement {
  const element = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) element.setAttribute(key, value);
  return element;
}

export function histogramChart(bins: HistogramBin[], width = 480, height = 160): SVGElement {
  const svg = svgElement("svg", {
    viewBox: `0 0 ${width} ${height}`,
    class: "chart histogram",
    role: "img",
  });
  if (!bins.length) return svg;
  const maxCount = Math.max(...bins.map((b) => b.count), 1);
  const barWidth = width / bins.length;
  bins.forEach((bin, index) => {
    const barHeight = (bin.count / maxCount) * (height - 20);
    const rect = svgElement("rect", {
      x: String(index * barWidth + 1),
      y: String(height - barHeight),
      width: String(Math.max(barWidth - 2, 1)),
      height: String(barHeight),
      class: "bar",
    });
    const title = svgElement("title", {});
    title.textContent = `[${bin.lower.toFixed(1)}, ${bin.upper.toFixed(1)}): ${bin.count}`;
    rect.append(title);
    svg.append(rect);
  });
  return svg;
}

export function boxplotChart(
  label: string,
  summary: FieldSummary,
  width = 480,
  height = 56,
): SVGElement {
  const svg = svgElement("svg", {
    viewBox: `0 0 ${width} ${height}`,
    class: "chart boxplot",
    role: "img",
    "data-field": label,
  });
  const { min, q1, median, q3, max } = summary;
  if (
    min === null || min === undefined || q1 === null || q1 === undefined ||
    median === null || median === undefined || q3 === null || q3 === undefined ||
    max === null || max === undefined
  ) {
    return svg;
  }
  const pad = 10;
  const span = max - min || 1;
  const x = (value: number) => pad + ((value - min) / span) * (width - 2 * pad);
  const mid = height / 2;
  svg.append(
    svgElement("line", { x1: String(x(min)), x2: String(x(max)), y1: String(mid), y2: String(mid), class: "whisker" }),
    svgElement("rect", {
      x: String(x(q1)),
      y: String(mid - 14),
      width: String(Math.max(x(q3) - x(q1), 1)),
      height: "28",
      class: "box",
    }),
    svgElement("line", {
      x1: String(x(median)),
      x2: String(x(median)),
      y1: String(mid - 14),
      y2: String(mid + 14),
      class: "median",
    }),
  );
  return svg;
}
