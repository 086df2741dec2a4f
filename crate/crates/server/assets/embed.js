// Renders LAVA indicators into host pages.
//
// Each <div data-indicator-id="..."> is filled with an SVG drawing of
// GET {base}/api/v1/render/{id}, where base is where this script was loaded
// from. Charts are fetched on every page load, so they follow new data.
(function () {
  "use strict";

  var script = document.currentScript;
  var base = script && script.src ? script.src.replace(/\/embed\.js(\?.*)?$/, "") : "";
  var NS = "http://www.w3.org/2000/svg";
  var W = 640, H = 360, M = { top: 36, right: 140, bottom: 56, left: 56 };
  var PALETTE = ["#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
    "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"];

  function el(name, attrs, parent) {
    var node = document.createElementNS(NS, name);
    for (var k in attrs) node.setAttribute(k, attrs[k]);
    if (parent) parent.appendChild(node);
    return node;
  }

  function text(parent, x, y, value, attrs) {
    var t = el("text", Object.assign({ x: x, y: y, "font-size": 11, "font-family": "sans-serif" }, attrs || {}), parent);
    t.textContent = value;
    return t;
  }

  function color(i) { return PALETTE[i % PALETTE.length]; }

  function extent(values) {
    var lo = Infinity, hi = -Infinity;
    values.forEach(function (v) {
      if (typeof v === "number" && isFinite(v)) { lo = Math.min(lo, v); hi = Math.max(hi, v); }
    });
    if (lo === Infinity) return [0, 1];
    if (lo === hi) { lo -= 1; hi += 1; }
    return [lo, hi];
  }

  function linear(d, r) {
    return function (v) { return r[0] + (v - d[0]) / (d[1] - d[0]) * (r[1] - r[0]); };
  }

  function yAxis(svg, y, d) {
    for (var i = 0; i <= 4; i++) {
      var v = d[0] + (d[1] - d[0]) * i / 4;
      el("line", { x1: M.left, x2: W - M.right, y1: y(v), y2: y(v), stroke: "#e5e5e5" }, svg);
      text(svg, M.left - 6, y(v) + 4, +v.toFixed(2), { "text-anchor": "end" });
    }
  }

  function band(svg, domain) {
    var step = (W - M.left - M.right) / Math.max(domain.length, 1);
    var every = Math.ceil(domain.length / 16);
    domain.forEach(function (label, i) {
      if (i % every) return;
      var x = M.left + step * (i + 0.5);
      text(svg, x, H - M.bottom + 14, label, {
        "text-anchor": "end", transform: "rotate(-30 " + x + " " + (H - M.bottom + 14) + ")"
      });
    });
    return step;
  }

  function legend(svg, names) {
    names.forEach(function (name, i) {
      var y = M.top + i * 16;
      el("rect", { x: W - M.right + 12, y: y - 9, width: 10, height: 10, fill: color(i) }, svg);
      text(svg, W - M.right + 26, y, name);
    });
  }

  function values(series) {
    return series.filter(function (s) { return s.kind === "values"; });
  }

  function bars(svg, spec) {
    var list = values(spec.series);
    var all = [0];
    list.forEach(function (s) { all = all.concat(s.values); });
    var d = extent(all), y = linear(d, [H - M.bottom, M.top]);
    yAxis(svg, y, d);
    var step = band(svg, spec.domain), w = step * 0.8 / Math.max(list.length, 1);
    list.forEach(function (s, k) {
      s.values.forEach(function (v, i) {
        var x = M.left + step * i + step * 0.1 + w * k;
        el("rect", { x: x, y: Math.min(y(v), y(0)), width: w, height: Math.abs(y(0) - y(v)), fill: color(k) }, svg);
      });
    });
    legend(svg, list.map(function (s) { return s.name; }));
  }

  function lines(svg, spec, stacked) {
    var list = values(spec.series);
    var totals = spec.domain.map(function () { return 0; });
    var layers = list.map(function (s) {
      return s.values.map(function (v, i) {
        var lo = stacked ? totals[i] : 0;
        if (stacked) totals[i] += v;
        return [lo, lo + v];
      });
    });
    var all = [0];
    layers.forEach(function (l) { l.forEach(function (p) { all.push(p[1]); }); });
    var d = extent(all), y = linear(d, [H - M.bottom, M.top]);
    yAxis(svg, y, d);
    var step = band(svg, spec.domain);
    var x = function (i) { return M.left + step * (i + 0.5); };
    layers.forEach(function (layer, k) {
      var top = layer.map(function (p, i) { return x(i) + "," + y(p[1]); });
      if (stacked) {
        var bottom = layer.map(function (p, i) { return x(i) + "," + y(p[0]); }).reverse();
        el("polygon", { points: top.concat(bottom).join(" "), fill: color(k), "fill-opacity": 0.7 }, svg);
      } else {
        el("polyline", { points: top.join(" "), fill: "none", stroke: color(k), "stroke-width": 2 }, svg);
      }
    });
    legend(svg, list.map(function (s) { return s.name; }));
  }

  function pie(svg, spec) {
    var s = values(spec.series)[0];
    if (!s) return;
    var total = s.values.reduce(function (a, b) { return a + Math.max(b, 0); }, 0) || 1;
    var cx = (W - M.right) / 2, cy = H / 2, r = Math.min(cx, cy) - 30, angle = -Math.PI / 2;
    s.values.forEach(function (v, i) {
      var a = Math.max(v, 0) / total * 2 * Math.PI;
      if (a >= 2 * Math.PI - 1e-9) {
        el("circle", { cx: cx, cy: cy, r: r, fill: color(i) }, svg);
      } else if (a > 0) {
        var x1 = cx + r * Math.cos(angle), y1 = cy + r * Math.sin(angle);
        var x2 = cx + r * Math.cos(angle + a), y2 = cy + r * Math.sin(angle + a);
        el("path", {
          d: "M" + cx + "," + cy + " L" + x1 + "," + y1 + " A" + r + "," + r + " 0 " + (a > Math.PI ? 1 : 0) + " 1 " + x2 + "," + y2 + " Z",
          fill: color(i)
        }, svg);
      }
      angle += a;
    });
    legend(svg, spec.domain);
  }

  function scatter(svg, spec) {
    var xs = [], ys = [];
    spec.series.forEach(function (s) {
      (s.points || []).forEach(function (p) { xs.push(p.x); ys.push(p.y); });
    });
    var dx = extent(xs), dy = extent(ys);
    var x = linear(dx, [M.left, W - M.right]), y = linear(dy, [H - M.bottom, M.top]);
    yAxis(svg, y, dy);
    for (var i = 0; i <= 4; i++) {
      var v = dx[0] + (dx[1] - dx[0]) * i / 4;
      text(svg, x(v), H - M.bottom + 14, +v.toFixed(2), { "text-anchor": "middle" });
    }
    spec.series.forEach(function (s, k) {
      (s.points || []).forEach(function (p) {
        var c = el("circle", { cx: x(p.x), cy: y(p.y), r: 4, fill: color(k), "fill-opacity": 0.8 }, svg);
        if (p.label) el("title", {}, c).textContent = p.label;
      });
    });
    legend(svg, spec.series.map(function (s) { return s.name; }));
  }

  function boxes(svg, spec) {
    var s = spec.series.filter(function (s) { return s.kind === "boxes"; })[0];
    if (!s) return;
    var all = [];
    s.boxes.forEach(function (b) { if (b) all = all.concat([b.low, b.high], b.outliers); });
    var d = extent(all), y = linear(d, [H - M.bottom, M.top]);
    yAxis(svg, y, d);
    var step = band(svg, spec.domain);
    s.boxes.forEach(function (b, i) {
      if (!b) return;
      var cx = M.left + step * (i + 0.5), w = step * 0.5;
      el("line", { x1: cx, x2: cx, y1: y(b.low), y2: y(b.high), stroke: "#333" }, svg);
      el("rect", { x: cx - w / 2, y: y(b.q3), width: w, height: Math.max(y(b.q1) - y(b.q3), 1), fill: color(0), stroke: "#333" }, svg);
      el("line", { x1: cx - w / 2, x2: cx + w / 2, y1: y(b.median), y2: y(b.median), stroke: "#333", "stroke-width": 2 }, svg);
      b.outliers.forEach(function (o) { el("circle", { cx: cx, cy: y(o), r: 3, fill: "none", stroke: "#333" }, svg); });
    });
  }

  var DRAW = {
    bar: bars,
    line: function (svg, spec) { lines(svg, spec, false); },
    stacked_area: function (svg, spec) { lines(svg, spec, true); },
    pie: pie,
    scatter: scatter,
    box_plot: boxes
  };

  function draw(container, spec) {
    var svg = el("svg", { viewBox: "0 0 " + W + " " + H, width: "100%", role: "img" });
    el("title", {}, svg).textContent = spec.title;
    text(svg, M.left, 20, spec.title, { "font-size": 14, "font-weight": "bold" });
    text(svg, (M.left + W - M.right) / 2, H - 6, spec.x_label, { "text-anchor": "middle" });
    text(svg, 14, H / 2, spec.y_label, { "text-anchor": "middle", transform: "rotate(-90 14 " + H / 2 + ")" });
    var empty = !spec.series.length || !spec.domain.length && spec.chart_type !== "scatter";
    if (empty) {
      text(svg, W / 2, H / 2, "No data", { "text-anchor": "middle", fill: "#888" });
    } else if (DRAW[spec.chart_type]) {
      DRAW[spec.chart_type](svg, spec);
    }
    container.replaceChildren(svg);
  }

  function load(container) {
    var id = container.getAttribute("data-indicator-id");
    container.setAttribute("data-lava-state", "loading");
    fetch(base + "/api/v1/render/" + encodeURIComponent(id))
      .then(function (r) {
        return r.json().then(function (body) {
          if (!r.ok) throw new Error(body.message || r.statusText);
          return body;
        });
      })
      .then(function (spec) {
        draw(container, spec);
        container.setAttribute("data-lava-state", "done");
      })
      .catch(function (e) {
        container.textContent = "Indicator unavailable: " + e.message;
        container.setAttribute("data-lava-state", "error");
      });
  }

  document.querySelectorAll("[data-indicator-id]").forEach(function (container) {
    if (!container.hasAttribute("data-lava-state")) load(container);
  });
})();
