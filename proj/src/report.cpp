#include "gappy/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gappy {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (const char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double_field(const std::string& s, const std::string& where) {
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw std::runtime_error(where + ": cannot parse number '" + s + "'");
  }
}

}  // namespace

std::string format_double(double v) {
  char shortest[64];
  // Shortest representation that parses back to the same bits.
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(shortest, sizeof shortest, "%.*g", prec, v);
    if (std::strtod(shortest, nullptr) == v) return shortest;
  }
  std::snprintf(shortest, sizeof shortest, "%.17g", v);
  return shortest;
}

void write_metrics_csv(const std::string& path,
                       const std::vector<MetricsRow>& rows) {
  std::ofstream out = open_out(path);
  out << "scenario,method,rmse,relative_rmse,max_error,n_pairs,seed\n";
  for (const MetricsRow& r : rows)
    out << r.scenario << ',' << r.method << ',' << format_double(r.rmse) << ','
        << format_double(r.relative_rmse) << ',' << format_double(r.max_error)
        << ',' << r.n_pairs << ',' << r.seed << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<MetricsRow> read_metrics_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open metrics file: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error(path + ": empty metrics file");
  std::vector<MetricsRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv_line(line);
    const std::string where = path + ":" + std::to_string(line_no);
    if (f.size() != 7)
      throw std::runtime_error(where + ": expected 7 fields, got " +
                               std::to_string(f.size()));
    MetricsRow r;
    r.scenario = f[0];
    r.method = f[1];
    r.rmse = parse_double_field(f[2], where);
    r.relative_rmse = parse_double_field(f[3], where);
    r.max_error = parse_double_field(f[4], where);
    r.n_pairs = static_cast<std::size_t>(
        std::strtoull(f[5].c_str(), nullptr, 10));
    r.seed = std::strtoull(f[6].c_str(), nullptr, 10);
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_history_csv(const std::string& path, const TrainHistory& history,
                       const std::vector<int>& modality_ids) {
  std::ofstream out = open_out(path);
  out << "epoch";
  for (const int id : modality_ids) out << ",white_m" << id;
  for (const int id : modality_ids) out << ",recon_m" << id;
  out << ",calib,total,seconds\n";
  for (const EpochStats& e : history.epochs) {
    out << e.epoch;
    for (const double v : e.whitening) out << ',' << format_double(v);
    for (const double v : e.reconstruction) out << ',' << format_double(v);
    out << ',' << format_double(e.calibration) << ','
        << format_double(e.total) << ',' << format_double(e.seconds) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_embedding_csv(const std::string& path, const FusionDataset& data,
                         const DatasetEmbedding& embedding) {
  std::ofstream out = open_out(path);
  const std::size_t p =
      embedding.empty() || embedding[0].empty() ? 0 : embedding[0][0].mean.size();
  out << "modality_id,burst_id";
  for (std::size_t c = 1; c <= p; ++c) out << ",z" << c;
  out << '\n';
  for (std::size_t k = 0; k < embedding.size(); ++k)
    for (std::size_t i = 0; i < embedding[k].size(); ++i) {
      out << data.modalities[k].modality_id << ','
          << data.modalities[k].bursts[i].burst_id;
      for (const double v : embedding[k][i].mean) out << ',' << format_double(v);
      out << '\n';
    }
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_scatter_csv(const std::string& path,
                       const std::vector<std::array<double, 2>>& pairs) {
  std::ofstream out = open_out(path);
  out << "latent_dist,embedded_dist\n";
  for (const auto& p : pairs)
    out << format_double(p[0]) << ',' << format_double(p[1]) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<std::array<double, 2>> read_scatter_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open scatter file: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error(path + ": empty scatter file");
  std::vector<std::array<double, 2>> pairs;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv_line(line);
    const std::string where = path + ":" + std::to_string(line_no);
    if (f.size() != 2)
      throw std::runtime_error(where + ": expected 2 fields");
    pairs.push_back({parse_double_field(f[0], where),
                     parse_double_field(f[1], where)});
  }
  return pairs;
}

void write_scatter_svg(const std::string& path,
                       const std::vector<ScatterSeries>& series) {
  constexpr double kSize = 640.0;
  constexpr double kMargin = 56.0;
  constexpr std::size_t kMaxPoints = 5000;
  const double plot = kSize - 2.0 * kMargin;

  double lim = 0.0;
  for (const ScatterSeries& s : series)
    for (const auto& p : s.points) lim = std::max({lim, p[0], p[1]});
  if (!(lim > 0.0)) lim = 1.0;
  lim *= 1.05;

  const auto sx = [&](double v) { return kMargin + v / lim * plot; };
  const auto sy = [&](double v) { return kSize - kMargin - v / lim * plot; };

  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e"};
  std::ofstream out = open_out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize
      << "\" height=\"" << kSize << "\" viewBox=\"0 0 " << kSize << ' '
      << kSize << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // Axes with min and max labels plus a mid tick.
  out << "<line x1=\"" << kMargin << "\" y1=\"" << kSize - kMargin
      << "\" x2=\"" << kSize - kMargin << "\" y2=\"" << kSize - kMargin
      << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << kMargin << "\" y1=\"" << kSize - kMargin
      << "\" x2=\"" << kMargin << "\" y2=\"" << kMargin
      << "\" stroke=\"black\"/>\n";
  for (const double frac : {0.0, 0.5, 1.0}) {
    const double v = frac * lim;
    char label[32];
    std::snprintf(label, sizeof label, "%.3g", v);
    out << "<text x=\"" << sx(v) << "\" y=\"" << kSize - kMargin + 20
        << "\" font-family=\"sans-serif\" font-size=\"12\" "
           "text-anchor=\"middle\">"
        << label << "</text>\n"
        << "<text x=\"" << kMargin - 8 << "\" y=\"" << sy(v) + 4
        << "\" font-family=\"sans-serif\" font-size=\"12\" "
           "text-anchor=\"end\">"
        << label << "</text>\n";
  }
  out << "<text x=\"" << kSize / 2 << "\" y=\"" << kSize - 12
      << "\" font-family=\"sans-serif\" font-size=\"14\" "
         "text-anchor=\"middle\">latent pairwise distance</text>\n"
      << "<text x=\"16\" y=\"" << kSize / 2
      << "\" font-family=\"sans-serif\" font-size=\"14\" "
         "text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << kSize / 2 << ")\">embedded pairwise distance</text>\n";

  out << "<line x1=\"" << sx(0.0) << "\" y1=\"" << sy(0.0) << "\" x2=\""
      << sx(lim) << "\" y2=\"" << sy(lim)
      << "\" stroke=\"#888888\" stroke-dasharray=\"6,4\"/>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kColors[s % 5];
    const std::vector<std::array<double, 2>>& pts = series[s].points;
    const std::size_t stride =
        pts.size() <= kMaxPoints ? 1 : (pts.size() + kMaxPoints - 1) / kMaxPoints;
    out << "<g fill=\"" << color << "\" fill-opacity=\"0.45\">\n";
    for (std::size_t i = 0; i < pts.size(); i += stride)
      out << "<circle cx=\"" << sx(pts[i][0]) << "\" cy=\"" << sy(pts[i][1])
          << "\" r=\"2\"/>\n";
    out << "</g>\n";
    out << "<circle cx=\"" << kMargin + 14 << "\" cy=\""
        << kMargin + 16.0 * static_cast<double>(s) << "\" r=\"4\" fill=\""
        << color << "\"/>\n"
        << "<text x=\"" << kMargin + 24 << "\" y=\""
        << kMargin + 16.0 * static_cast<double>(s) + 4
        << "\" font-family=\"sans-serif\" font-size=\"13\">" << series[s].label
        << "</text>\n";
  }
  out << "</svg>\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string emit_report(const std::string& run_dir) {
  namespace fs = std::filesystem;
  const fs::path dir(run_dir);
  const fs::path metrics_path = dir / "metrics.csv";

  std::vector<std::string> missing;
  if (!fs::exists(metrics_path)) missing.push_back("metrics.csv");

  std::vector<MetricsRow> rows;
  if (missing.empty()) rows = read_metrics_csv(metrics_path.string());

  std::vector<ScatterSeries> series;
  for (const MetricsRow& r : rows) {
    if (r.method == "completion") continue;  // no per-pair scatter
    const std::string name = "scatter_" + r.method + ".csv";
    if (!fs::exists(dir / name)) {
      missing.push_back(name);
      continue;
    }
    series.push_back({r.method, read_scatter_csv((dir / name).string())});
  }
  if (!missing.empty()) {
    std::string msg = "report: missing artifacts in " + run_dir + ":";
    for (const std::string& m : missing) msg += " " + m;
    throw std::runtime_error(msg);
  }

  write_scatter_svg((dir / "scatter.svg").string(), series);

  std::ostringstream text;
  text << "run " << run_dir << '\n';
  for (const MetricsRow& r : rows) {
    char rel[32];
    std::snprintf(rel, sizeof rel, "%.2f%%", 100.0 * r.relative_rmse);
    text << "  " << r.scenario << " seed " << r.seed << "  method="
         << r.method << "  rmse=" << format_double(r.rmse) << "  relative="
         << rel << "  max=" << format_double(r.max_error) << "  pairs="
         << r.n_pairs << '\n';
  }
  return text.str();
}

}  // namespace gappy
