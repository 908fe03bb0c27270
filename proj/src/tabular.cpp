#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "metabo/benchfn.hpp"

namespace metabo {
namespace {

struct Table {
  std::vector<EncodedConfig> rows;
  std::vector<double> ys;
  std::vector<bool> categorical;
};

// Per-dimension distance: numeric dims use the encoded difference, categorical
// dims and activity mismatches count as 1.
double distance2(const Table& t, const EncodedConfig& a, const EncodedConfig& b) {
  double sum = 0.0;
  for (Eigen::Index d = 0; d < a.x.size(); ++d) {
    if (a.active[d] != b.active[d]) {
      sum += 1.0;
    } else if (!a.active[d]) {
      continue;
    } else if (t.categorical[static_cast<std::size_t>(d)]) {
      sum += a.x[d] == b.x[d] ? 0.0 : 1.0;
    } else {
      const double diff = a.x[d] - b.x[d];
      sum += diff * diff;
    }
  }
  return sum;
}

double interpolate(const Table& t, const EncodedConfig& q, Interpolation mode) {
  std::vector<std::pair<double, std::size_t>> dist(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) dist[i] = {distance2(t, q, t.rows[i]), i};

  if (mode == Interpolation::nearest) {
    auto best = std::min_element(dist.begin(), dist.end());
    return t.ys[best->second];
  }

  const std::size_t k = std::min<std::size_t>(kIdwNeighbors, dist.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  if (dist.front().first == 0.0) return t.ys[dist.front().second];
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double w = 1.0 / std::pow(std::sqrt(dist[i].first), kIdwPower);
    num += w * t.ys[dist[i].second];
    den += w;
  }
  return num / den;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    cell.erase(0, cell.find_first_not_of(" \t\r"));
    cell.erase(cell.find_last_not_of(" \t\r") + 1);
    cells.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& cell, std::size_t line_no) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != cell.size() || cell.empty())
    throw TabularError("line " + std::to_string(line_no) + ": not a number: '" + cell + "'");
  return v;
}

}  // namespace

ObjectiveFunction tabular_surrogate(std::string id, const ConfigurationSpace& space, std::vector<Configuration> rows,
                                    std::vector<double> ys, Interpolation interpolation) {
  if (rows.empty()) throw TabularError("empty table");
  if (rows.size() != ys.size()) throw TabularError("row count and target count differ");

  auto table = std::make_shared<Table>();
  table->categorical.resize(space.size());
  for (std::size_t d = 0; d < space.size(); ++d)
    table->categorical[d] = space.parameter(d).kind == ParamKind::categorical;
  for (const auto& row : rows) {
    if (auto v = validate(space, row); !v.empty()) throw TabularError("invalid table row: " + v.front().message);
    table->rows.push_back(encode(space, row));
  }
  for (double y : ys)
    if (!std::isfinite(y)) throw TabularError("non-finite target in table");
  table->ys = std::move(ys);

  const double lo = *std::min_element(table->ys.begin(), table->ys.end());
  const double hi = *std::max_element(table->ys.begin(), table->ys.end());
  FunctionMetadata meta;
  meta.short_name = id;
  meta.value_range = hi - lo;
  return ObjectiveFunction(
      std::move(id), space, lo,
      [table, space, interpolation](const Configuration& x) {
        return interpolate(*table, encode(space, x), interpolation);
      },
      std::move(meta));
}

ObjectiveFunction load_tabular_surrogate(const std::filesystem::path& path, const ConfigurationSpace& space,
                                         Interpolation interpolation) {
  std::ifstream in(path);
  if (!in) throw TabularError("cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw TabularError(path.string() + ": empty table");
  const auto header = split_csv(line);
  if (header.size() != space.size() + 1 || header.back() != "y")
    throw TabularError(path.string() + ": header must list every parameter followed by y");
  std::vector<std::size_t> column_param(space.size());
  for (std::size_t c = 0; c < space.size(); ++c) {
    auto idx = space.find(header[c]);
    if (!idx) throw TabularError(path.string() + ": unknown column '" + header[c] + "'");
    column_param[c] = *idx;
  }

  std::vector<Configuration> rows;
  std::vector<double> ys;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size())
      throw TabularError(path.string() + ": line " + std::to_string(line_no) + " has " +
                         std::to_string(cells.size()) + " cells");
    std::vector<std::optional<double>> values(space.size());
    for (std::size_t c = 0; c < space.size(); ++c)
      if (!cells[c].empty()) values[column_param[c]] = parse_cell(cells[c], line_no);
    rows.emplace_back(space, std::move(values));
    ys.push_back(parse_cell(cells.back(), line_no));
  }
  if (rows.empty()) throw TabularError(path.string() + ": empty table");

  auto id = path.stem().string();
  return tabular_surrogate(std::move(id), space, std::move(rows), std::move(ys), interpolation);
}

}  // namespace metabo
