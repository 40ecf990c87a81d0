#include "namdkit/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>
#include <openssl/evp.h>

#include "namdkit/error.hpp"
#include "util.hpp"

namespace namdkit::report {

using analysis::FesGrid;
using analysis::PerAtomSeries;
using analysis::TimeSeries;

namespace {

std::string header_label(const std::string& name, const std::string& unit) {
  return unit.empty() ? name : name + " (" + unit + ")";
}

// CSV fields only need quoting when they contain separators or quotes.
std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string xml_escape(std::string_view s) {
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

std::string num(double v) {
  if (v == 0.0) v = 0.0;  // no "-0.00"
  return detail::fixed(v, 2);
}

// Tick label text: up to 4 significant decimals, trailing zeros trimmed.
std::string tick_text(double v) {
  if (std::abs(v) < 1e-12) return "0";
  std::string s = detail::fixed(v, 4);
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  return s;
}

struct Range {
  double lo, hi;
};

Range padded_range(double lo, double hi) {
  if (hi - lo <= 0) {
    const double pad = std::max(std::abs(lo) * 0.05, 0.5);
    return {lo - pad, hi + pad};
  }
  return {lo, hi};
}

struct Frame2D {
  double left = 72, right = 24, top = 40, bottom = 56;
  double width, height;
  double plot_w() const { return width - left - right; }
  double plot_h() const { return height - top - bottom; }
  double x(double v, Range r) const { return left + (v - r.lo) / (r.hi - r.lo) * plot_w(); }
  double y(double v, Range r) const { return top + plot_h() - (v - r.lo) / (r.hi - r.lo) * plot_h(); }
};

void svg_open(std::string& out, const PlotStyle& style) {
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(style.width) + "\" height=\"" +
         std::to_string(style.height) + "\" viewBox=\"0 0 " + std::to_string(style.width) + " " +
         std::to_string(style.height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(style.width) + "\" height=\"" +
         std::to_string(style.height) + "\" fill=\"#ffffff\"/>\n";
  if (!style.title.empty())
    out += "<text x=\"" + num(style.width / 2.0) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" +
           xml_escape(style.title) + "</text>\n";
}

void svg_axes(std::string& out, const Frame2D& f, Range xr, Range yr, const std::string& x_label,
              const std::string& y_label) {
  const double x0 = f.left, x1 = f.left + f.plot_w();
  const double y0 = f.top + f.plot_h(), y1 = f.top;
  out += "<path class=\"axis\" d=\"M" + num(x0) + "," + num(y1) + " L" + num(x0) + "," + num(y0) + " L" + num(x1) +
         "," + num(y0) + "\" fill=\"none\" stroke=\"#000000\"/>\n";
  constexpr int kTicks = 5;
  for (int i = 0; i < kTicks; ++i) {
    const double t = static_cast<double>(i) / (kTicks - 1);
    const double xv = xr.lo + t * (xr.hi - xr.lo);
    const double yv = yr.lo + t * (yr.hi - yr.lo);
    const double px = f.x(xv, xr), py = f.y(yv, yr);
    out += "<line x1=\"" + num(px) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(px) + "\" y2=\"" + num(y0 + 5) +
           "\" stroke=\"#000000\"/>\n";
    out += "<text x=\"" + num(px) + "\" y=\"" + num(y0 + 18) + "\" text-anchor=\"middle\">" + tick_text(xv) + "</text>\n";
    out += "<line x1=\"" + num(x0 - 5) + "\" y1=\"" + num(py) + "\" x2=\"" + num(x0) + "\" y2=\"" + num(py) +
           "\" stroke=\"#000000\"/>\n";
    out += "<text x=\"" + num(x0 - 8) + "\" y=\"" + num(py + 4) + "\" text-anchor=\"end\">" + tick_text(yv) + "</text>\n";
  }
  out += "<text class=\"x-label\" x=\"" + num(f.left + f.plot_w() / 2) + "\" y=\"" + num(f.height - 14) +
         "\" text-anchor=\"middle\">" + xml_escape(x_label) + "</text>\n";
  out += "<text class=\"y-label\" x=\"16\" y=\"" + num(f.top + f.plot_h() / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         num(f.top + f.plot_h() / 2) + ")\">" + xml_escape(y_label) + "</text>\n";
}

// Perceptually ordered ramp from dark purple (low F) to yellow (high F).
std::string ramp_color(double t) {
  static constexpr std::array<std::array<double, 3>, 5> kStops{{
      {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}};
  t = std::clamp(t, 0.0, 1.0) * (kStops.size() - 1);
  const auto i = std::min<std::size_t>(static_cast<std::size_t>(t), kStops.size() - 2);
  const double f = t - static_cast<double>(i);
  char buf[8];
  int rgb[3];
  for (int k = 0; k < 3; ++k) rgb[k] = static_cast<int>(std::lround(kStops[i][k] + f * (kStops[i + 1][k] - kStops[i][k])));
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
  return buf;
}

}  // namespace

std::string csv_text(const TimeSeries& series) {
  std::string out = "index," + csv_field(header_label(series.name, series.unit)) + "\n";
  for (const auto& p : series.points) out += std::to_string(p.frame_index) + "," + detail::shortest(p.value) + "\n";
  return out;
}

std::string csv_text(const PerAtomSeries& series) {
  std::string out = "atom_index,residue,res_name," + csv_field(header_label(series.name, series.unit)) + "\n";
  for (std::size_t k = 0; k < series.values.size(); ++k) {
    std::string residue, res_name;
    if (k < series.residue_slot.size() && series.residue_slot[k] < series.residue_rollup.size()) {
      const auto& r = series.residue_rollup[series.residue_slot[k]];
      residue = r.residue.to_string();
      res_name = r.res_name;
    }
    out += std::to_string(series.atom_indices[k]) + "," + csv_field(residue) + "," + csv_field(res_name) + "," +
           detail::shortest(series.values[k]) + "\n";
  }
  return out;
}

std::string csv_text(const EnergyTable& table) {
  std::string out;
  for (std::size_t i = 0; i < table.column_names.size(); ++i) out += (i ? "," : "") + csv_field(table.column_names[i]);
  out += "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.values.size(); ++i) out += (i ? "," : "") + detail::shortest(row.values[i]);
    out += "\n";
  }
  return out;
}

std::string csv_text(const FesGrid& grid) {
  std::string out = "rg_bin,rmsd_bin,rg_lo,rg_hi,rmsd_lo,rmsd_hi,count,free_energy (kT)\n";
  for (std::size_t i = 0; i < grid.n_rg(); ++i) {
    for (std::size_t j = 0; j < grid.n_rmsd(); ++j) {
      const auto c = grid.cell(i, j);
      out += std::to_string(i) + "," + std::to_string(j) + "," + detail::shortest(grid.rg_edges[i]) + "," +
             detail::shortest(grid.rg_edges[i + 1]) + "," + detail::shortest(grid.rmsd_edges[j]) + "," +
             detail::shortest(grid.rmsd_edges[j + 1]) + "," + std::to_string(grid.counts[c]) + "," +
             (grid.occupied_mask[c] ? detail::shortest(grid.free_energy[c]) : std::string("nan")) + "\n";
    }
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

template <typename T>
void write_csv(const T& value, const std::filesystem::path& path) {
  write_text_file(path, csv_text(value));
}

template void write_csv(const TimeSeries&, const std::filesystem::path&);
template void write_csv(const PerAtomSeries&, const std::filesystem::path&);
template void write_csv(const EnergyTable&, const std::filesystem::path&);
template void write_csv(const FesGrid&, const std::filesystem::path&);

TimeSeries read_series_csv(std::string_view text) {
  TimeSeries series;
  bool have_header = false;
  detail::for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    if (line.empty()) return true;
    if (!have_header) {
      const auto comma = line.find(',');
      if (comma == std::string_view::npos || line.substr(0, comma) != "index")
        throw ParseError("series CSV header must start with 'index,'", line_no);
      std::string label(line.substr(comma + 1));
      if (label.size() >= 2 && label.front() == '"' && label.back() == '"') label = label.substr(1, label.size() - 2);
      const auto open = label.rfind(" (");
      if (open != std::string::npos && label.back() == ')') {
        series.name = label.substr(0, open);
        series.unit = label.substr(open + 2, label.size() - open - 3);
      } else {
        series.name = label;
      }
      have_header = true;
      return true;
    }
    const auto comma = line.find(',');
    const auto idx = comma == std::string_view::npos ? std::nullopt : detail::parse_number<std::int64_t>(line.substr(0, comma));
    const auto val = comma == std::string_view::npos ? std::nullopt : detail::parse_number<double>(line.substr(comma + 1));
    if (!idx || !val) throw ParseError("malformed series CSV row '" + std::string(line) + "'", line_no);
    series.points.push_back({*idx, *val});
    return true;
  });
  if (!have_header) throw ParseError("empty series CSV");
  return series;
}

TimeSeries read_series_csv_file(const std::filesystem::path& path) {
  const auto text = detail::read_text_file(path.string());
  try {
    return read_series_csv(text);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.line());
  }
}

FesGrid read_fes_csv(std::string_view text) {
  struct Row {
    std::size_t i, j, count;
    double rg_lo, rg_hi, rmsd_lo, rmsd_hi, f;
  };
  std::vector<Row> rows;
  std::size_t n_rg = 0, n_rmsd = 0;
  detail::for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    if (line_no == 1 || line.empty()) return true;
    std::vector<std::string_view> f;
    std::size_t pos = 0;
    while (true) {
      const auto comma = line.find(',', pos);
      f.push_back(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    if (f.size() != 8) throw ParseError("expected 8 fields in free-energy CSV", line_no);
    const auto i = detail::parse_number<std::size_t>(f[0]);
    const auto j = detail::parse_number<std::size_t>(f[1]);
    const auto count = detail::parse_number<std::size_t>(f[6]);
    std::array<std::optional<double>, 4> edges{detail::parse_number<double>(f[2]), detail::parse_number<double>(f[3]),
                                               detail::parse_number<double>(f[4]), detail::parse_number<double>(f[5])};
    const auto fe = f[7] == "nan" ? std::optional<double>(std::numeric_limits<double>::quiet_NaN())
                                  : detail::parse_number<double>(f[7]);
    if (!i || !j || !count || !fe || !edges[0] || !edges[1] || !edges[2] || !edges[3])
      throw ParseError("malformed free-energy CSV row", line_no);
    rows.push_back({*i, *j, *count, *edges[0], *edges[1], *edges[2], *edges[3], *fe});
    n_rg = std::max(n_rg, *i + 1);
    n_rmsd = std::max(n_rmsd, *j + 1);
    return true;
  });
  if (rows.size() != n_rg * n_rmsd || rows.empty()) throw ParseError("free-energy CSV does not describe a full grid");
  FesGrid g;
  g.rg_edges.assign(n_rg + 1, 0.0);
  g.rmsd_edges.assign(n_rmsd + 1, 0.0);
  g.counts.assign(rows.size(), 0);
  g.free_energy.assign(rows.size(), 0.0);
  g.occupied_mask.assign(rows.size(), false);
  for (const auto& r : rows) {
    g.rg_edges[r.i] = r.rg_lo;
    g.rg_edges[r.i + 1] = r.rg_hi;
    g.rmsd_edges[r.j] = r.rmsd_lo;
    g.rmsd_edges[r.j + 1] = r.rmsd_hi;
    const auto c = g.cell(r.i, r.j);
    g.counts[c] = r.count;
    g.free_energy[c] = r.f;
    g.occupied_mask[c] = r.count > 0;
  }
  return g;
}

std::string render_svg(const TimeSeries& series, const PlotStyle& style) {
  if (series.points.empty()) throw DomainError("cannot plot empty series '" + series.name + "'");
  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo, y_lo = x_lo, y_hi = -x_lo;
  for (const auto& p : series.points) {
    if (!std::isfinite(p.value)) throw DomainError("series '" + series.name + "' has non-finite values");
    const double x = static_cast<double>(p.frame_index) * style.x_scale;
    x_lo = std::min(x_lo, x);
    x_hi = std::max(x_hi, x);
    y_lo = std::min(y_lo, p.value);
    y_hi = std::max(y_hi, p.value);
  }
  const Range xr = padded_range(x_lo, x_hi);
  const Range yr = padded_range(y_lo, y_hi);
  Frame2D f;
  f.width = style.width;
  f.height = style.height;

  std::string out;
  svg_open(out, style);
  svg_axes(out, f, xr, yr, header_label(style.x_label, style.x_unit), header_label(series.name, series.unit));
  out += "<polyline class=\"series\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
  bool first = true;
  for (const auto& p : series.points) {
    if (!std::isfinite(p.value)) throw DomainError("series '" + series.name + "' has non-finite values");
    const double x = static_cast<double>(p.frame_index) * style.x_scale;
    out += (first ? "" : " ") + num(f.x(x, xr)) + "," + num(f.y(p.value, yr));
    first = false;
  }
  out += "\"/>\n</svg>\n";
  return out;
}

std::string render_svg(const FesGrid& grid, const PlotStyle& style) {
  if (grid.rg_edges.size() < 2 || grid.rmsd_edges.size() < 2 || grid.counts.empty())
    throw DomainError("cannot plot an empty free-energy grid");
  double f_max = 0;
  for (std::size_t c = 0; c < grid.free_energy.size(); ++c)
    if (grid.occupied_mask[c]) f_max = std::max(f_max, grid.free_energy[c]);

  const Range xr{grid.rmsd_edges.front(), grid.rmsd_edges.back()};
  const Range yr{grid.rg_edges.front(), grid.rg_edges.back()};
  Frame2D f;
  f.width = style.width;
  f.height = style.height;
  f.right = 90;

  std::string out;
  svg_open(out, style);
  for (std::size_t i = 0; i < grid.n_rg(); ++i) {
    for (std::size_t j = 0; j < grid.n_rmsd(); ++j) {
      const auto c = grid.cell(i, j);
      if (!grid.occupied_mask[c]) continue;
      const double x0 = f.x(grid.rmsd_edges[j], xr), x1 = f.x(grid.rmsd_edges[j + 1], xr);
      const double y0 = f.y(grid.rg_edges[i + 1], yr), y1 = f.y(grid.rg_edges[i], yr);
      const double t = f_max > 0 ? grid.free_energy[c] / f_max : 0.0;
      out += "<rect class=\"cell\" x=\"" + num(x0) + "\" y=\"" + num(y0) + "\" width=\"" + num(x1 - x0) + "\" height=\"" +
             num(y1 - y0) + "\" fill=\"" + ramp_color(t) + "\"/>\n";
    }
  }
  svg_axes(out, f, xr, yr, "RMSD (Å)", "Rg (Å)");

  const double bar_x = f.left + f.plot_w() + 16;
  constexpr int kLegendSteps = 16;
  const double step_h = f.plot_h() / kLegendSteps;
  for (int k = 0; k < kLegendSteps; ++k) {
    const double t = 1.0 - (k + 0.5) / kLegendSteps;
    out += "<rect class=\"legend\" x=\"" + num(bar_x) + "\" y=\"" + num(f.top + k * step_h) + "\" width=\"14\" height=\"" +
           num(step_h) + "\" fill=\"" + ramp_color(t) + "\"/>\n";
  }
  out += "<text x=\"" + num(bar_x + 18) + "\" y=\"" + num(f.top + 10) + "\">" + tick_text(f_max) + "</text>\n";
  out += "<text x=\"" + num(bar_x + 18) + "\" y=\"" + num(f.top + f.plot_h()) + "\">0</text>\n";
  out += "<text x=\"" + num(bar_x) + "\" y=\"" + num(f.top - 8) + "\">F (kT)</text>\n";
  out += "</svg>\n";
  return out;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 computation failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  return sha256_hex(detail::read_text_file(path.string()));
}

std::string manifest_json(const RunManifest& m, const std::filesystem::path& run_dir) {
  for (const auto& [name, rel] : m.outputs)
    if (!std::filesystem::exists(run_dir / rel))
      throw IoError("manifest output '" + name + "' missing at '" + (run_dir / rel).string() + "'");
  nlohmann::json j;
  j["spec_label"] = m.spec_label;
  j["input_hashes"] = m.input_hashes;
  j["commands_run"] = m.commands_run;
  j["outputs"] = m.outputs;
  j["tool_version"] = m.tool_version;
  j["generated_at"] = m.generated_at;
  return j.dump(2) + "\n";
}

}  // namespace namdkit::report
