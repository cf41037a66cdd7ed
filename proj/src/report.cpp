#include "dpc/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "dpc/stats.hpp"

namespace dpc {
namespace {

// Config-level means of one model, keyed by config label in first-seen order.
struct ConfigTable {
  std::vector<std::string> labels;
  std::vector<std::string> methods;
  std::map<std::string, std::map<std::string, double>> values;  // label -> metric -> mean
};

ConfigTable collect(const std::vector<ResultRecord>& records, const std::string& model) {
  ConfigTable table;
  for (const auto& r : records) {
    if (r.model_id != model || r.aggregate != "mean") continue;
    const std::string label = r.method + "|" + r.hyperparams;
    if (!table.values.count(label)) {
      table.labels.push_back(label);
      table.methods.push_back(r.method);
    }
    table.values[label][r.metric] = r.value;
  }
  return table;
}

double lookup(const ConfigTable& t, const std::string& label, const std::string& metric) {
  const auto& m = t.values.at(label);
  const auto it = m.find(metric);
  return it == m.end() ? std::nan("") : it->second;
}

double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string metric_title(const std::string& metric) {
  if (metric == "pc_abpc") return "PC-ABPC";
  if (metric == "dpc_abpc") return "DPC-ABPC";
  if (metric == "infidelity") return "Infidelity";
  return metric;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& text, ReportSummary& summary) {
  std::ofstream out(path);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
  summary.files.push_back(path);
}

struct Axis {
  double lo, hi, pixel_lo, pixel_hi;
  double operator()(double v) const {
    return hi == lo ? (pixel_lo + pixel_hi) / 2 : pixel_lo + (v - lo) / (hi - lo) * (pixel_hi - pixel_lo);
  }
};

Axis padded_axis(double lo, double hi, double pixel_lo, double pixel_hi) {
  const double pad = hi > lo ? 0.05 * (hi - lo) : std::max(1e-12, std::abs(lo) * 0.05 + 1e-12);
  return {lo - pad, hi + pad, pixel_lo, pixel_hi};
}

std::string boxplot_svg(const std::string& title, const std::vector<std::pair<std::string, BoxStats>>& boxes) {
  const double width = 120.0 + 90.0 * static_cast<double>(boxes.size()), height = 360.0;
  double lo = boxes.front().second.min, hi = boxes.front().second.max;
  for (const auto& [_, b] : boxes) lo = std::min(lo, b.min), hi = std::max(hi, b.max);
  const Axis y = padded_axis(lo, hi, height - 50, 40);

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n"
      << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
      << "</text>\n"
      << "<line x1=\"60\" y1=\"" << y(y.lo) << "\" x2=\"60\" y2=\"" << y(y.hi) << "\" stroke=\"black\"/>\n"
      << "<text x=\"55\" y=\"" << y(y.hi) + 4 << "\" text-anchor=\"end\" font-size=\"10\">" << fmt(y.hi) << "</text>\n"
      << "<text x=\"55\" y=\"" << y(y.lo) << "\" text-anchor=\"end\" font-size=\"10\">" << fmt(y.lo) << "</text>\n";
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const auto& [name, b] = boxes[i];
    const double cx = 100.0 + 90.0 * static_cast<double>(i), half = 25.0;
    svg << "<g class=\"box\" data-method=\"" << escape(name) << "\" data-count=\"" << b.count << "\" data-min=\""
        << fmt(b.min) << "\" data-max=\"" << fmt(b.max) << "\">\n"
        << "  <line class=\"whisker\" x1=\"" << cx << "\" y1=\"" << y(b.min) << "\" x2=\"" << cx << "\" y2=\""
        << y(b.q1) << "\" stroke=\"black\"/>\n"
        << "  <line class=\"whisker\" x1=\"" << cx << "\" y1=\"" << y(b.q3) << "\" x2=\"" << cx << "\" y2=\""
        << y(b.max) << "\" stroke=\"black\"/>\n"
        << "  <line x1=\"" << cx - half / 2 << "\" y1=\"" << y(b.min) << "\" x2=\"" << cx + half / 2 << "\" y2=\""
        << y(b.min) << "\" stroke=\"black\"/>\n"
        << "  <line x1=\"" << cx - half / 2 << "\" y1=\"" << y(b.max) << "\" x2=\"" << cx + half / 2 << "\" y2=\""
        << y(b.max) << "\" stroke=\"black\"/>\n"
        << "  <rect x=\"" << cx - half << "\" y=\"" << y(b.q3) << "\" width=\"" << 2 * half << "\" height=\""
        << std::max(0.5, y(b.q1) - y(b.q3)) << "\" fill=\"#9ecae1\" stroke=\"black\"/>\n"
        << "  <line class=\"median\" x1=\"" << cx - half << "\" y1=\"" << y(b.median) << "\" x2=\"" << cx + half
        << "\" y2=\"" << y(b.median) << "\" stroke=\"#d62728\" stroke-width=\"2\"/>\n"
        << "  <text x=\"" << cx << "\" y=\"" << height - 30 << "\" text-anchor=\"middle\" font-size=\"10\">"
        << escape(name) << "</text>\n"
        << "</g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string scatter_svg(const std::string& title, const std::vector<std::string>& labels,
                        const std::vector<stats::ParetoPoint>& points, const std::vector<std::size_t>& front) {
  const double width = 520.0, height = 420.0;
  double xl = points.front().infidelity, xh = xl, yl = points.front().dpc, yh = yl;
  for (const auto& p : points) {
    xl = std::min(xl, p.infidelity), xh = std::max(xh, p.infidelity);
    yl = std::min(yl, p.dpc), yh = std::max(yh, p.dpc);
  }
  const Axis x = padded_axis(xl, xh, 70, width - 20);
  const Axis y = padded_axis(yl, yh, height - 50, 40);
  const std::set<std::size_t> on_front(front.begin(), front.end());

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n"
      << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
      << "</text>\n"
      << "<text x=\"" << width / 2 << "\" y=\"" << height - 10 << "\" text-anchor=\"middle\" font-size=\"11\">"
      << "Infidelity (lower is better)</text>\n"
      << "<text x=\"15\" y=\"" << height / 2 << "\" font-size=\"11\" transform=\"rotate(-90 15 " << height / 2
      << ")\" text-anchor=\"middle\">DPC-ABPC (higher is better)</text>\n"
      << "<line x1=\"70\" y1=\"" << height - 50 << "\" x2=\"" << width - 20 << "\" y2=\"" << height - 50
      << "\" stroke=\"black\"/>\n"
      << "<line x1=\"70\" y1=\"40\" x2=\"70\" y2=\"" << height - 50 << "\" stroke=\"black\"/>\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    const bool pareto = on_front.count(i) > 0;
    svg << "<circle class=\"" << (pareto ? "pareto" : "config") << "\" data-label=\"" << escape(labels[i])
        << "\" cx=\"" << x(points[i].infidelity) << "\" cy=\"" << y(points[i].dpc) << "\" r=\""
        << (pareto ? 5 : 3) << "\" fill=\"" << (pareto ? "#d62728" : "#7f7f7f") << "\"/>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string rho_text(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() < 2) return "undefined";
  const auto rho = stats::spearman_rho(xs, ys);
  return rho ? fmt(*rho) : "undefined";
}

}  // namespace

BoxStats box_stats(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("box_stats: no values");
  std::sort(values.begin(), values.end());
  return {values.front(), quantile(values, 0.25), quantile(values, 0.5), quantile(values, 0.75), values.back(),
          values.size()};
}

ReportSummary emit_report(const std::vector<ResultRecord>& records, const std::filesystem::path& out_dir) {
  if (records.empty()) throw std::invalid_argument("emit_report: no records");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir))
    throw std::runtime_error("cannot create report directory " + out_dir.string());

  ReportSummary summary;
  std::vector<std::string> models;
  for (const auto& r : records)
    if (std::find(models.begin(), models.end(), r.model_id) == models.end()) models.push_back(r.model_id);

  std::ostringstream correlations;
  correlations << "model\tgroup\tconfigs\trho_infidelity_dpc\trho_infidelity_pc\trho_pc_dpc\tpareto_size\n";

  for (const auto& model : models) {
    const ConfigTable table = collect(records, model);
    std::vector<std::string> method_order;
    for (const auto& m : table.methods)
      if (std::find(method_order.begin(), method_order.end(), m) == method_order.end()) method_order.push_back(m);

    std::ostringstream methods_tsv;
    methods_tsv << "method\tmetric\tconfigs\tmean\tmedian\tmin\tmax\n";
    for (const char* metric : {"pc_abpc", "dpc_abpc", "infidelity"}) {
      std::vector<std::pair<std::string, BoxStats>> boxes;
      for (const auto& method : method_order) {
        std::vector<double> values;
        for (std::size_t i = 0; i < table.labels.size(); ++i) {
          if (table.methods[i] != method) continue;
          const double v = lookup(table, table.labels[i], metric);
          if (std::isfinite(v)) values.push_back(v);
        }
        if (values.empty()) continue;
        const auto s = stats::summarize(values);
        methods_tsv << method << '\t' << metric << '\t' << values.size() << '\t' << fmt(s.mean) << '\t'
                    << fmt(s.median) << '\t' << fmt(s.min) << '\t' << fmt(s.max) << '\n';
        boxes.emplace_back(method, box_stats(values));
      }
      if (boxes.empty()) {
        const std::string notice = "skipped " + std::string(metric) + " boxplot for " + model + ": no finite values";
        std::cerr << "notice: " << notice << '\n';
        summary.notices.push_back(notice);
        continue;
      }
      write_file(out_dir / (model + "_" + metric + "_boxplot.svg"),
                 boxplot_svg(model + " " + metric_title(metric), boxes), summary);
    }
    write_file(out_dir / (model + "_methods.tsv"), methods_tsv.str(), summary);

    // Correlations and the Pareto set over configs with both metrics finite.
    const auto group_rows = [&](const std::string& group) {
      std::vector<std::size_t> rows;
      for (std::size_t i = 0; i < table.labels.size(); ++i) {
        const bool lime = table.methods[i].rfind("lime", 0) == 0;
        if (group == "all" || (group == "lime") == lime) rows.push_back(i);
      }
      return rows;
    };
    for (const char* group : {"all", "lime", "non_lime"}) {
      std::vector<double> inf_dpc_x, inf_dpc_y, inf_pc_x, inf_pc_y, pc_dpc_x, pc_dpc_y;
      std::vector<stats::ParetoPoint> points;
      std::vector<std::string> labels;
      for (std::size_t i : group_rows(group)) {
        const auto& label = table.labels[i];
        const double inf = lookup(table, label, "infidelity"), dpc = lookup(table, label, "dpc_abpc"),
                     pc = lookup(table, label, "pc_abpc");
        if (std::isfinite(inf) && std::isfinite(dpc)) {
          inf_dpc_x.push_back(inf), inf_dpc_y.push_back(dpc);
          points.push_back({inf, dpc});
          labels.push_back(label);
        }
        if (std::isfinite(inf) && std::isfinite(pc)) inf_pc_x.push_back(inf), inf_pc_y.push_back(pc);
        if (std::isfinite(pc) && std::isfinite(dpc)) pc_dpc_x.push_back(pc), pc_dpc_y.push_back(dpc);
      }
      const auto rows = group_rows(group);
      if (rows.empty()) continue;
      std::vector<std::size_t> front;
      if (!points.empty()) front = stats::pareto_front(points);
      correlations << model << '\t' << group << '\t' << rows.size() << '\t' << rho_text(inf_dpc_x, inf_dpc_y) << '\t'
                   << rho_text(inf_pc_x, inf_pc_y) << '\t' << rho_text(pc_dpc_x, pc_dpc_y) << '\t'
                   << (points.empty() ? std::string("undefined") : std::to_string(front.size())) << '\n';
      if (std::string(group) != "all") continue;
      if (points.empty()) {
        const std::string notice = "skipped scatter for " + model + ": infidelity or dpc_abpc missing";
        std::cerr << "notice: " << notice << '\n';
        summary.notices.push_back(notice);
        continue;
      }
      auto& pareto_labels = summary.pareto[model];
      for (std::size_t i : front) pareto_labels.push_back(labels[i]);
      write_file(out_dir / (model + "_scatter.svg"),
                 scatter_svg(model + ": Infidelity vs DPC-ABPC", labels, points, front), summary);
      std::ostringstream pareto_tsv;
      pareto_tsv << "config\tinfidelity\tdpc_abpc\n";
      for (std::size_t i : front)
        pareto_tsv << labels[i] << '\t' << fmt(points[i].infidelity) << '\t' << fmt(points[i].dpc) << '\n';
      write_file(out_dir / (model + "_pareto.tsv"), pareto_tsv.str(), summary);
    }
  }
  write_file(out_dir / "summary.tsv", correlations.str(), summary);
  return summary;
}

}  // namespace dpc
