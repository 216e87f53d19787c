#include <charconv>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>

#include "bsam/error.hpp"
#include "bsam/runner.hpp"

namespace bsam {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell += c;
    }
  }
  cells.push_back(cell);
  return cells;
}

struct Selector {
  std::string name;
  std::optional<double> rho;
};

Selector parse_selector(const std::string& s) {
  const auto at = s.find('@');
  if (at == std::string::npos) return {s, std::nullopt};
  double rho = 0.0;
  const std::string r = s.substr(at + 1);
  const auto [p, ec] = std::from_chars(r.data(), r.data() + r.size(), rho);
  if (ec != std::errc() || p != r.data() + r.size()) throw ContractError("bad rho in selector '" + s + "'");
  return {s.substr(0, at), rho};
}

struct Column {
  double sum = 0.0;
  std::size_t n = 0;
};

}  // namespace

std::vector<CompareRow> compare_results(const std::string& csv_text, const std::string& baseline,
                                        const std::string& candidate) {
  std::istringstream in(csv_text);
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    header = split_csv_line(line);
    break;
  }
  if (header.size() < 4 || header[0] != "optimizer") throw ContractError("not a results.csv table");

  const Selector sel[2] = {parse_selector(baseline), parse_selector(candidate)};
  std::vector<std::string> value_cols;
  for (std::size_t c = 4; c < header.size(); ++c) {
    if (header[c] != "wall_s") value_cols.push_back(header[c]);
  }
  std::map<std::string, Column> acc[2];
  std::size_t matched[2] = {0, 0};

  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) throw ContractError("malformed results row: " + line);
    if (cells[3] != "ok") continue;
    double rho = 0.0;
    std::from_chars(cells[1].data(), cells[1].data() + cells[1].size(), rho);
    for (int s = 0; s < 2; ++s) {
      if (cells[0] != sel[s].name || (sel[s].rho && *sel[s].rho != rho)) continue;
      ++matched[s];
      for (std::size_t c = 4; c < header.size(); ++c) {
        if (header[c] == "wall_s" || cells[c].empty()) continue;
        double v = 0.0;
        const auto [p, ec] = std::from_chars(cells[c].data(), cells[c].data() + cells[c].size(), v);
        if (ec != std::errc()) continue;
        auto& col = acc[s][header[c]];
        col.sum += v;
        ++col.n;
      }
    }
  }
  for (int s = 0; s < 2; ++s) {
    if (matched[s] == 0) {
      throw ContractError("no status=ok rows for '" + (s == 0 ? baseline : candidate) + "' in results");
    }
  }

  std::vector<CompareRow> rows;
  for (const auto& col : value_cols) {
    const auto b = acc[0].find(col);
    const auto c = acc[1].find(col);
    if (b == acc[0].end() || c == acc[1].end()) continue;
    CompareRow r;
    r.metric = col;
    r.baseline = b->second.sum / static_cast<double>(b->second.n);
    r.candidate = c->second.sum / static_cast<double>(c->second.n);
    r.delta = r.candidate - r.baseline;
    rows.push_back(r);
  }
  return rows;
}

std::string compare_csv(const std::vector<CompareRow>& rows) {
  std::ostringstream os;
  os << "metric,baseline,candidate,delta\n";
  for (const auto& r : rows) {
    os << r.metric << ',' << format_number(r.baseline) << ',' << format_number(r.candidate) << ','
       << format_number(r.delta) << '\n';
  }
  return os.str();
}

std::string compare_table(const std::vector<CompareRow>& rows, const std::string& baseline,
                          const std::string& candidate) {
  std::ostringstream os;
  os << std::left << std::setw(16) << "metric" << std::right << std::setw(14) << baseline << std::setw(14)
     << candidate << std::setw(14) << "delta" << '\n';
  os << std::fixed << std::setprecision(4);
  for (const auto& r : rows) {
    os << std::left << std::setw(16) << r.metric << std::right << std::setw(14) << r.baseline << std::setw(14)
       << r.candidate << std::setw(14) << std::showpos << r.delta << std::noshowpos << '\n';
  }
  return os.str();
}

}  // namespace bsam
