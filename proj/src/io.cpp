#include "mixest/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "mixest/error.hpp"

namespace mixest {

Sample read_sample(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open data file '" + path.string() + "'");
  Sample s;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r");
    const std::string tok = line.substr(first, last - first + 1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v))
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": not a number: '" + tok + "'");
    s.values.push_back(v);
  }
  if (s.values.empty()) throw InputError("data file '" + path.string() + "' has no observations");
  return s;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_sample(const Sample& s) {
  std::string out;
  for (double v : s.values) out += format_double(v) + "\n";
  return out;
}

Json to_json(const MixingMeasure& g) {
  return Json{{"atoms", g.atoms()}, {"weights", g.weights()}};
}

MixingMeasure measure_from_json(const Json& j) {
  try {
    return canonicalize(j.at("atoms").get<std::vector<Atom>>(),
                        j.at("weights").get<std::vector<double>>());
  } catch (const Json::exception& e) {
    throw InputError(std::string("malformed mixing measure JSON: ") + e.what());
  }
}

Json to_json(const FitResult& r) {
  return Json{{"m", r.order},
              {"G_hat", to_json(r.g_hat)},
              {"h_value", r.h_value},
              {"affinity", r.affinity},
              {"diagnostics",
               {{"iterations", r.iterations},
                {"converged", r.converged},
                {"winning_start", r.winning_start}}}};
}

Json to_json(const SelectionResult& r) {
  Json sweep = Json::array();
  for (const auto& f : r.sweep) sweep.push_back({{"m", f.order}, {"h", f.h_value}, {"G", to_json(f.g_hat)}});
  Json trace = Json::array();
  for (const auto& t : r.trace)
    trace.push_back({{"m", t.m}, {"quantity", t.quantity}, {"threshold", t.threshold},
                     {"satisfied", t.satisfied}});
  return Json{{"selector", to_string(r.selector)},
              {"m_hat", r.m_hat},
              {"cap_hit", r.cap_hit},
              {"sigma1", r.sigma1},
              {"sigma0", r.sigma0},
              {"G_hat", to_json(r.g_hat)},
              {"h_value", r.sweep[r.m_hat - 1].h_value},
              {"sweep", sweep},
              {"threshold_trace", trace}};
}

std::string grid_csv(const QuadratureGrid& grid) {
  std::string out = "x,weight\n";
  for (std::size_t i = 0; i < grid.size(); ++i)
    out += format_double(grid.points()[i]) + "," + format_double(grid.weights()[i]) + "\n";
  return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  std::error_code ec;
  fs::create_directories(dir, ec);
  const fs::path tmp = dir / ("." + path.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + tmp.string() + "'");
    out << contents;
    out.flush();
    if (!out) throw InputError("write to '" + tmp.string() + "' failed");
  }
  fs::rename(tmp, path, ec);
  if (ec) throw InputError("cannot rename '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

}  // namespace mixest
