#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "vscrl/algo/metrics.hpp"

namespace vscrl::cli {

struct CurvePoint {
  double env_steps = 0.0;  // mean over seeds
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

struct Curve {
  std::string label;
  int seeds = 0;
  std::vector<CurvePoint> points;
};

// Every metrics.jsonl below `dir`, grouped by the directory holding the
// per-seed subdirectories (so <out>/multiroom-n2/vscrl/seed-1/metrics.jsonl
// lands in group "multiroom-n2/vscrl").
inline std::map<std::string, std::vector<std::vector<algo::MetricsRecord>>> find_runs(const std::string& dir) {
  namespace fs = std::filesystem;
  std::map<std::string, std::vector<std::vector<algo::MetricsRecord>>> groups;
  if (!fs::is_directory(dir)) throw Error("no-runs-found", dir + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().filename() == "metrics.jsonl") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    auto label = fs::relative(f.parent_path().parent_path(), dir).generic_string();
    if (label.empty() || label == ".") label = fs::path(dir).filename().string();
    groups[label].push_back(algo::read_metrics(f.string()));
  }
  if (groups.empty()) throw Error("no-runs-found", "no metrics.jsonl under " + dir);
  return groups;
}

// Seeds are aligned by evaluation checkpoint index; the curve stops at the
// shortest run.
inline Curve aggregate(const std::string& label, const std::vector<std::vector<algo::MetricsRecord>>& runs) {
  std::vector<std::vector<const algo::MetricsRecord*>> evals;
  for (const auto& run : runs) {
    auto& e = evals.emplace_back();
    for (const auto& r : run) {
      if (r.eval_success) e.push_back(&r);
    }
  }
  std::size_t n = evals.empty() ? 0 : evals.front().size();
  for (const auto& e : evals) n = std::min(n, e.size());
  Curve c{label, static_cast<int>(runs.size()), {}};
  for (std::size_t k = 0; k < n; ++k) {
    CurvePoint p{0.0, 0.0, 1.0, 0.0};
    for (const auto& e : evals) {
      const double v = *e[k]->eval_success;
      p.env_steps += static_cast<double>(e[k]->env_steps) / static_cast<double>(evals.size());
      p.mean += v / static_cast<double>(evals.size());
      p.lo = std::min(p.lo, v);
      p.hi = std::max(p.hi, v);
    }
    c.points.push_back(p);
  }
  return c;
}

inline std::string curves_csv(const std::vector<Curve>& curves) {
  std::ostringstream os;
  os << "label,seeds,index,env_steps,mean,min,max\n";
  for (const auto& c : curves) {
    for (std::size_t k = 0; k < c.points.size(); ++k) {
      const auto& p = c.points[k];
      os << c.label << ',' << c.seeds << ',' << k << ',' << p.env_steps << ',' << p.mean << ',' << p.lo << ','
         << p.hi << '\n';
    }
  }
  return os.str();
}

// Mean success against env steps with a shaded min-max band per curve.
inline std::string curves_svg(const std::vector<Curve>& curves, const std::string& title) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  const double W = 720, H = 440, left = 70, right = 200, top = 40, bottom = 60;
  const double pw = W - left - right, ph = H - top - bottom;
  double xmax = 1.0;
  for (const auto& c : curves) {
    for (const auto& p : c.points) xmax = std::max(xmax, p.env_steps);
  }
  auto X = [&](double s) { return left + pw * s / xmax; };
  auto Y = [&](double v) { return top + ph * (1.0 - v); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << left + pw / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n";
  for (int i = 0; i <= 5; ++i) {
    const double v = i / 5.0;
    os << "<line x1=\"" << left << "\" x2=\"" << left + pw << "\" y1=\"" << Y(v) << "\" y2=\"" << Y(v)
       << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << left - 8 << "\" y=\"" << Y(v) + 4 << "\" text-anchor=\"end\">" << v << "</text>\n";
    const double s = xmax * i / 5.0;
    os << "<text x=\"" << X(s) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
       << static_cast<long>(s / 1000.0) << "k</text>\n";
  }
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 16 << "\" text-anchor=\"middle\">env steps</text>\n";
  os << "<text transform=\"translate(18," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
     << "eval success</text>\n";

  for (std::size_t i = 0; i < curves.size(); ++i) {
    const auto& c = curves[i];
    const char* color = palette[i % std::size(palette)];
    if (!c.points.empty()) {
      os << "<polygon fill=\"" << color << "\" fill-opacity=\"0.18\" stroke=\"none\" points=\"";
      for (const auto& p : c.points) os << X(p.env_steps) << ',' << Y(p.hi) << ' ';
      for (auto it = c.points.rbegin(); it != c.points.rend(); ++it) os << X(it->env_steps) << ',' << Y(it->lo) << ' ';
      os << "\"/>\n<polyline fill=\"none\" stroke-width=\"2\" stroke=\"" << color << "\" points=\"";
      for (const auto& p : c.points) os << X(p.env_steps) << ',' << Y(p.mean) << ' ';
      os << "\"/>\n";
    }
    const double ly = top + 16 + 20 * static_cast<double>(i);
    os << "<line x1=\"" << left + pw + 14 << "\" x2=\"" << left + pw + 34 << "\" y1=\"" << ly << "\" y2=\"" << ly
       << "\" stroke-width=\"3\" stroke=\"" << color << "\"/>\n";
    os << "<text x=\"" << left + pw + 40 << "\" y=\"" << ly + 4 << "\">" << c.label << " (" << c.seeds
       << " seeds)</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

// Writes <stem>.svg and <stem>.csv; returns the curves drawn.
inline std::vector<Curve> plot_runs(const std::string& metrics_dir, const std::string& stem) {
  std::vector<Curve> curves;
  for (const auto& [label, runs] : find_runs(metrics_dir)) curves.push_back(aggregate(label, runs));
  std::ofstream(stem + ".svg") << curves_svg(curves, "Learning curves");
  std::ofstream(stem + ".csv") << curves_csv(curves);
  return curves;
}

}  // namespace vscrl::cli
