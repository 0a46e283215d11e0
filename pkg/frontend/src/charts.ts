// Dependency-free SVG charts. Every chart exposes its bound series via
// data-values / data-labels attributes so rendering can be checked against
// the API payload byte-for-byte.

const SVG_NS = "http://www.w3.org/2000/svg";

export interface SeriesPoint {
  label: string;
  value: number;
}

function svgElement(tag: string, attrs: Record<string, string>): SVGElement {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  return node;
}

export function barChart(
  points: SeriesPoint[],
  options: { name: string; width?: number; height?: number } ,
): SVGSVGElement {
  const width = options.width ?? 420;
  const height = options.height ?? 160;
  const svg = svgElement("svg", {
    viewBox: `0 0 ${width} ${height}`,
    width: String(width),
    height: String(height),
    role: "img",
  }) as SVGSVGElement;
  svg.dataset.chart = options.name;
  svg.dataset.labels = JSON.stringify(points.map((p) => p.label));
  svg.dataset.values = JSON.stringify(points.map((p) => p.value));

  const max = Math.max(1, ...points.map((p) => p.value));
  const labelBand = 18;
  const plotHeight = height - labelBand;
  const step = width / Math.max(1, points.length);
  const barWidth = Math.max(4, step * 0.6);

  points.forEach((point, i) => {
    const barHeight = (point.value / max) * (plotHeight - 8);
    const x = i * step + (step - barWidth) / 2;
    svg.append(
      svgElement("rect", {
        x: x.toFixed(1),
        y: (plotHeight - barHeight).toFixed(1),
        width: barWidth.toFixed(1),
        height: barHeight.toFixed(1),
        class: "chart-bar",
        "data-label": point.label,
        "data-value": String(point.value),
      }),
    );
    const text = svgElement("text", {
      x: (i * step + step / 2).toFixed(1),
      y: String(height - 4),
      "text-anchor": "middle",
      class: "chart-label",
    });
    text.textContent = point.label;
    svg.append(text);
  });
  return svg;
}
