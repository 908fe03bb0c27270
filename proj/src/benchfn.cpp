#include "metabo/benchfn.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>

#include "metabo/sobol.hpp"

namespace metabo {

ObjectiveFunction::ObjectiveFunction(std::string id, ConfigurationSpace space, double optimum_value, Evaluator eval,
                                     FunctionMetadata metadata, RawEvaluator raw)
    : id_(std::move(id)),
      space_(std::move(space)),
      optimum_(optimum_value),
      eval_(std::move(eval)),
      metadata_(std::move(metadata)),
      raw_(std::move(raw)) {}

double ObjectiveFunction::evaluate(const Configuration& x) const {
  if (x.space().name() != space_.name() || !validate(space_, x).empty())
    throw EvaluationError("configuration is not valid for " + id_);
  return eval_(x);
}

const ObjectiveFunction& FunctionFamily::member(std::string_view id) const {
  for (const auto& f : members)
    if (f.id() == id) return f;
  throw EvaluationError("family " + name + " has no member '" + std::string(id) + "'");
}

namespace {

using std::numbers::pi;

double branin(std::span<const double> x) {
  const double b = 5.1 / (4.0 * pi * pi), c = 5.0 / pi, t = 1.0 / (8.0 * pi);
  const double a = x[1] - b * x[0] * x[0] + c * x[0] - 6.0;
  return a * a + 10.0 * (1.0 - t) * std::cos(x[0]) + 10.0;
}

double camelback(std::span<const double> x) {
  const double x1 = x[0], x2 = x[1];
  return (4.0 - 2.1 * x1 * x1 + x1 * x1 * x1 * x1 / 3.0) * x1 * x1 + x1 * x2 + (-4.0 + 4.0 * x2 * x2) * x2 * x2;
}

double goldstein_price(std::span<const double> x) {
  const double x1 = x[0], x2 = x[1];
  const double a = 1.0 + (x1 + x2 + 1.0) * (x1 + x2 + 1.0) *
                             (19.0 - 14.0 * x1 + 3.0 * x1 * x1 - 14.0 * x2 + 6.0 * x1 * x2 + 3.0 * x2 * x2);
  const double b = 30.0 + (2.0 * x1 - 3.0 * x2) * (2.0 * x1 - 3.0 * x2) *
                              (18.0 - 32.0 * x1 + 12.0 * x1 * x1 + 48.0 * x2 - 36.0 * x1 * x2 + 27.0 * x2 * x2);
  return a * b;
}

constexpr std::array<double, 4> kHartmannAlpha = {1.0, 1.2, 3.0, 3.2};

double hartmann3(std::span<const double> x) {
  static constexpr double A[4][3] = {{3.0, 10.0, 30.0}, {0.1, 10.0, 35.0}, {3.0, 10.0, 30.0}, {0.1, 10.0, 35.0}};
  static constexpr double P[4][3] = {{0.3689, 0.1170, 0.2673},
                                     {0.4699, 0.4387, 0.7470},
                                     {0.1091, 0.8732, 0.5547},
                                     {0.0381, 0.5743, 0.8828}};
  double sum = 0.0;
  for (int i = 0; i < 4; ++i) {
    double inner = 0.0;
    for (int j = 0; j < 3; ++j) inner += A[i][j] * (x[j] - P[i][j]) * (x[j] - P[i][j]);
    sum += kHartmannAlpha[i] * std::exp(-inner);
  }
  return -sum;
}

double hartmann6(std::span<const double> x) {
  static constexpr double A[4][6] = {{10.0, 3.0, 17.0, 3.5, 1.7, 8.0},
                                     {0.05, 10.0, 17.0, 0.1, 8.0, 14.0},
                                     {3.0, 3.5, 1.7, 10.0, 17.0, 8.0},
                                     {17.0, 8.0, 0.05, 10.0, 0.1, 14.0}};
  static constexpr double P[4][6] = {{0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886},
                                     {0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991},
                                     {0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650},
                                     {0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381}};
  double sum = 0.0;
  for (int i = 0; i < 4; ++i) {
    double inner = 0.0;
    for (int j = 0; j < 6; ++j) inner += A[i][j] * (x[j] - P[i][j]) * (x[j] - P[i][j]);
    sum += kHartmannAlpha[i] * std::exp(-inner);
  }
  return -sum;
}

double levy2d(std::span<const double> x) {
  const double w1 = 1.0 + (x[0] - 1.0) / 4.0;
  const double w2 = 1.0 + (x[1] - 1.0) / 4.0;
  const double s1 = std::sin(pi * w1), s2 = std::sin(pi * w1 + 1.0), s3 = std::sin(2.0 * pi * w2);
  return s1 * s1 + (w1 - 1.0) * (w1 - 1.0) * (1.0 + 10.0 * s2 * s2) + (w2 - 1.0) * (w2 - 1.0) * (1.0 + s3 * s3);
}

double rosenbrock(std::span<const double> x) {
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double a = x[i + 1] - x[i] * x[i];
    sum += 100.0 * a * a + (1.0 - x[i]) * (1.0 - x[i]);
  }
  return sum;
}

double sin_one_1d(double x) { return 0.5 * std::sin(13.0 * x) * std::sin(27.0 * x) + 0.5; }

double sin_one(std::span<const double> x) { return sin_one_1d(x[0]); }
double sin_two(std::span<const double> x) { return sin_one_1d(x[0]) * sin_one_1d(x[1]); }

constexpr double kSinOneMin = 0.04292634243364346;
constexpr double kSinOneArgmin = 0.6330131633013163;

struct ArtificialSpec {
  const char* id;
  const char* short_name;
  double (*fn)(std::span<const double>);
  double optimum;
  int local;
  bool local_at_least;
  int global;
  std::vector<std::vector<double>> minimizers;
};

std::vector<ArtificialSpec> artificial_specs() {
  return {
      {"branin", "Bra", branin, 0.39788735772973816, 3, false, 3,
       {{-pi, 12.275}, {pi, 2.275}, {9.42477796076938, 2.475}}},
      {"camelback", "Cam", camelback, -1.0316284534898774, 6, false, 2,
       {{0.08984201368301331, -0.7126564032704135}, {-0.08984201368301331, 0.7126564032704135}}},
      {"goldstein_price", "Gold", goldstein_price, 3.0, 2, false, 1, {{0.0, -1.0}}},
      {"hartmann3", "Har3", hartmann3, -3.8627797873327, 4, false, 1, {{0.114614, 0.555649, 0.852547}}},
      {"hartmann6", "Har6", hartmann6, -3.3223680114155, 6, false, 1,
       {{0.20169, 0.150011, 0.476874, 0.275332, 0.311652, 0.6573}}},
      {"levy2d", "Lev2", levy2d, 0.0, 10, true, 1, {{1.0, 1.0}}},
      {"rosenbrock2d", "Ros2", rosenbrock, 0.0, 1, false, 1, {{1.0, 1.0}}},
      {"rosenbrock5d", "Ros5", rosenbrock, 0.0, 1, false, 1, {{1.0, 1.0, 1.0, 1.0, 1.0}}},
      {"sin_one", "Sin1", sin_one, kSinOneMin, 7, false, 1, {{kSinOneArgmin}}},
      {"sin_two", "Sin2", sin_two, kSinOneMin * kSinOneMin, 10, true, 10, {{kSinOneArgmin, kSinOneArgmin}}},
  };
}

std::vector<double> native_point(const Configuration& x) {
  std::vector<double> v(x.values().size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = *x[i];
  return v;
}

double estimate_range(const ConfigurationSpace& space, double (*fn)(std::span<const double>), double optimum) {
  const auto u = sobol_points(space.size(), 4096);
  double hi = optimum;
  std::vector<double> x(space.size());
  for (Eigen::Index r = 0; r < u.rows(); ++r) {
    for (std::size_t d = 0; d < x.size(); ++d)
      x[d] = decode_value(space.parameter(d), u(r, static_cast<Eigen::Index>(d)));
    hi = std::max(hi, fn(x));
  }
  return hi - optimum;
}

FunctionFamily build_artificial_family() {
  FunctionFamily family{"artificial", {}};
  for (auto& spec : artificial_specs()) {
    auto space = bundled_space(spec.id);
    FunctionMetadata meta{spec.short_name, spec.local, spec.local_at_least, spec.global, spec.minimizers,
                          estimate_range(space, spec.fn, spec.optimum)};
    auto fn = spec.fn;
    family.members.emplace_back(
        spec.id, space, spec.optimum, [fn](const Configuration& x) { return fn(native_point(x)); }, std::move(meta),
        [fn](std::span<const double> x) { return fn(x); });
  }
  return family;
}

// Bounded Nelder-Mead in unit-cube coordinates; points are clamped to [0,1]^d.
std::vector<double> polish(const std::function<double(const std::vector<double>&)>& f, std::vector<double> start,
                           double initial_step) {
  const std::size_t d = start.size();
  auto clamp01 = [](std::vector<double> p) {
    for (auto& v : p) v = std::clamp(v, 0.0, 1.0);
    return p;
  };
  std::vector<std::vector<double>> simplex(d + 1, start);
  for (std::size_t i = 0; i < d; ++i) {
    simplex[i + 1][i] += start[i] + initial_step <= 1.0 ? initial_step : -initial_step;
    simplex[i + 1] = clamp01(simplex[i + 1]);
  }
  std::vector<double> fv(d + 1);
  for (std::size_t i = 0; i <= d; ++i) fv[i] = f(simplex[i]);

  std::vector<std::size_t> order(d + 1);
  for (int iter = 0; iter < 20000; ++iter) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[d - 1];

    double size = 0.0;
    for (std::size_t i = 0; i <= d; ++i)
      for (std::size_t k = 0; k < d; ++k) size = std::max(size, std::abs(simplex[i][k] - simplex[best][k]));
    if (size < 1e-11) break;

    std::vector<double> centroid(d, 0.0);
    for (std::size_t i = 0; i <= d; ++i)
      if (i != worst)
        for (std::size_t k = 0; k < d; ++k) centroid[k] += simplex[i][k] / static_cast<double>(d);
    auto along = [&](double t) {
      std::vector<double> p(d);
      for (std::size_t k = 0; k < d; ++k) p[k] = centroid[k] + t * (simplex[worst][k] - centroid[k]);
      return clamp01(std::move(p));
    };
    auto reflected = along(-1.0);
    const double fr = f(reflected);
    if (fr < fv[best]) {
      auto expanded = along(-2.0);
      const double fe = f(expanded);
      if (fe < fr) {
        simplex[worst] = std::move(expanded);
        fv[worst] = fe;
      } else {
        simplex[worst] = std::move(reflected);
        fv[worst] = fr;
      }
    } else if (fr < fv[second]) {
      simplex[worst] = std::move(reflected);
      fv[worst] = fr;
    } else {
      auto contracted = fr < fv[worst] ? along(-0.5) : along(0.5);
      const double fc = f(contracted);
      if (fc < std::min(fr, fv[worst])) {
        simplex[worst] = std::move(contracted);
        fv[worst] = fc;
      } else {
        for (std::size_t i = 0; i <= d; ++i) {
          if (i == best) continue;
          for (std::size_t k = 0; k < d; ++k) simplex[i][k] = simplex[best][k] + 0.5 * (simplex[i][k] - simplex[best][k]);
          fv[i] = f(simplex[i]);
        }
      }
    }
  }
  const auto best = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
  return simplex[best];
}

}  // namespace

const FunctionFamily& artificial_family() {
  static const FunctionFamily family = build_artificial_family();
  return family;
}

std::vector<std::string> artificial_ids() {
  std::vector<std::string> ids;
  for (const auto& f : artificial_family().members) ids.push_back(f.id());
  return ids;
}

std::optional<ObjectiveFunction> find_artificial(std::string_view name) {
  for (const auto& f : artificial_family().members)
    if (f.id() == name || f.metadata().short_name == name) return f;
  return std::nullopt;
}

ObjectiveFunction artificial_function(std::string_view name) {
  if (auto f = find_artificial(name)) return *f;
  std::string known;
  for (const auto& id : artificial_ids()) known += (known.empty() ? "" : ", ") + id;
  throw EvaluationError("unknown function '" + std::string(name) + "'; registered: " + known);
}

OptimaCounts count_optima(const ObjectiveFunction& fn, int grid_resolution) {
  const auto& space = fn.space();
  const std::size_t d = space.size();
  if (d == 0 || d > 3) throw std::invalid_argument("count_optima: dimension too high for a grid census");
  if (!fn.has_raw()) throw std::invalid_argument("count_optima: function has no native evaluator");
  if (grid_resolution < 2) throw std::invalid_argument("count_optima: resolution must be >= 2");
  for (const auto& hp : space.parameters())
    if (hp.kind != ParamKind::continuous || hp.condition || hp.log_scale)
      throw std::invalid_argument("count_optima: needs a plain continuous box");

  const std::size_t res = static_cast<std::size_t>(grid_resolution);
  std::size_t total = 1;
  for (std::size_t k = 0; k < d; ++k) total *= res;

  std::vector<double> lo(d), width(d);
  for (std::size_t k = 0; k < d; ++k) {
    lo[k] = space.parameter(k).lower;
    width[k] = space.parameter(k).upper - space.parameter(k).lower;
  }
  auto to_native = [&](const std::vector<double>& u) {
    std::vector<double> x(d);
    for (std::size_t k = 0; k < d; ++k) x[k] = lo[k] + u[k] * width[k];
    return x;
  };

  std::vector<double> values(total);
  {
    std::vector<double> x(d);
    for (std::size_t idx = 0; idx < total; ++idx) {
      std::size_t rem = idx;
      for (std::size_t k = d; k-- > 0;) {
        x[k] = lo[k] + (static_cast<double>(rem % res) + 0.5) * width[k] / static_cast<double>(res);
        rem /= res;
      }
      values[idx] = fn.raw(x);
    }
  }

  std::vector<std::ptrdiff_t> offsets;
  std::vector<std::array<int, 3>> steps;
  for (int a = -1; a <= 1; ++a)
    for (int b = (d > 1 ? -1 : 0); b <= (d > 1 ? 1 : 0); ++b)
      for (int c = (d > 2 ? -1 : 0); c <= (d > 2 ? 1 : 0); ++c)
        if (a || b || c) steps.push_back({a, b, c});

  auto neighbours = [&](std::size_t idx, auto&& visit) {
    std::array<std::ptrdiff_t, 3> coord{};
    std::size_t rem = idx;
    for (std::size_t k = d; k-- > 0;) {
      coord[k] = static_cast<std::ptrdiff_t>(rem % res);
      rem /= res;
    }
    for (const auto& s : steps) {
      std::size_t n = 0;
      bool inside = true;
      for (std::size_t k = 0; k < d; ++k) {
        const auto c = coord[k] + s[k];
        if (c < 0 || c >= static_cast<std::ptrdiff_t>(res)) {
          inside = false;
          break;
        }
        n = n * res + static_cast<std::size_t>(c);
      }
      if (inside) visit(n);
    }
  };

  std::vector<std::size_t> candidates;
  for (std::size_t idx = 0; idx < total; ++idx) {
    bool is_min = true;
    neighbours(idx, [&](std::size_t n) { is_min = is_min && values[idx] <= values[n]; });
    if (is_min) candidates.push_back(idx);
  }

  // Plateau merging: equal-valued adjacent candidates form one seed.
  std::vector<std::size_t> parent(candidates.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto root = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    neighbours(candidates[i], [&](std::size_t n) {
      if (values[n] != values[candidates[i]]) return;
      auto it = std::lower_bound(candidates.begin(), candidates.end(), n);
      if (it != candidates.end() && *it == n) parent[root(i)] = root(static_cast<std::size_t>(it - candidates.begin()));
    });
  }

  auto unit_f = [&](const std::vector<double>& u) { return fn.raw(to_native(u)); };
  std::vector<std::pair<std::vector<double>, double>> minima;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (root(i) != i) continue;
    std::vector<double> u(d);
    std::size_t rem = candidates[i];
    for (std::size_t k = d; k-- > 0;) {
      u[k] = (static_cast<double>(rem % res) + 0.5) / static_cast<double>(res);
      rem /= res;
    }
    auto best = polish(unit_f, u, 1.0 / static_cast<double>(res));
    const double value = unit_f(best);
    bool known = false;
    for (const auto& [p, v] : minima) {
      double dist = 0.0;
      for (std::size_t k = 0; k < d; ++k) dist = std::max(dist, std::abs(p[k] - best[k]));
      if (dist < 1e-3) {
        known = true;
        break;
      }
    }
    if (!known) minima.emplace_back(std::move(best), value);
  }

  OptimaCounts counts;
  counts.local = static_cast<int>(minima.size());
  for (const auto& [p, v] : minima)
    if (v <= fn.optimum_value() + 1e-6) ++counts.global;
  return counts;
}

int count_local_optima(const ObjectiveFunction& fn, int grid_resolution) {
  return count_optima(fn, grid_resolution).local;
}

}  // namespace metabo
