#include "metabo/configspace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <mutex>
#include <set>
#include <unordered_map>

namespace metabo {

namespace detail {
const std::vector<std::pair<std::string_view, std::string_view>>& bundled_space_sources();
}

namespace {

std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general);
  std::string s(buf, end);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

bool is_integral(double v) { return std::isfinite(v) && std::floor(v) == v; }

std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

std::string_view to_string(ParamKind kind) {
  switch (kind) {
    case ParamKind::continuous: return "continuous";
    case ParamKind::integer: return "integer";
    case ParamKind::categorical: return "categorical";
  }
  return "?";
}

bool Hyperparameter::contains(double value) const {
  if (!std::isfinite(value)) return false;
  switch (kind) {
    case ParamKind::continuous: return value >= lower && value <= upper;
    case ParamKind::integer: return is_integral(value) && value >= lower && value <= upper;
    case ParamKind::categorical:
      return is_integral(value) && value >= 0 && value < static_cast<double>(choices.size());
  }
  return false;
}

Hyperparameter Hyperparameter::continuous(std::string name, double lower, double upper, double default_value,
                                          bool log_scale) {
  Hyperparameter hp;
  hp.name = std::move(name);
  hp.kind = ParamKind::continuous;
  hp.lower = lower;
  hp.upper = upper;
  hp.default_value = default_value;
  hp.log_scale = log_scale;
  return hp;
}

Hyperparameter Hyperparameter::integer(std::string name, double lower, double upper, double default_value) {
  Hyperparameter hp = continuous(std::move(name), lower, upper, default_value);
  hp.kind = ParamKind::integer;
  return hp;
}

Hyperparameter Hyperparameter::categorical(std::string name, std::vector<std::string> choices,
                                           std::string_view default_choice) {
  Hyperparameter hp;
  hp.name = std::move(name);
  hp.kind = ParamKind::categorical;
  hp.choices = std::move(choices);
  auto it = std::find(hp.choices.begin(), hp.choices.end(), default_choice);
  if (it == hp.choices.end()) throw SpaceError("default '" + std::string(default_choice) + "' not a choice of " + hp.name);
  hp.default_value = static_cast<double>(it - hp.choices.begin());
  hp.lower = 0;
  hp.upper = static_cast<double>(hp.choices.size() - 1);
  return hp;
}

Hyperparameter&& Hyperparameter::when(std::string parent, std::vector<std::string> values) && {
  condition = Condition{std::move(parent), std::move(values)};
  return std::move(*this);
}

// ---------------------------------------------------------------------------

ConfigurationSpace::ConfigurationSpace(std::string name, std::vector<Hyperparameter> parameters) {
  auto impl = std::make_shared<Impl>();
  impl->name = std::move(name);
  impl->parameters = std::move(parameters);
  const std::size_t n = impl->parameters.size();
  impl->parent.assign(n, std::nullopt);
  impl->children.assign(n, {});
  impl->activating.assign(n, {});

  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < n; ++i) {
    auto& hp = impl->parameters[i];
    if (hp.name.empty()) throw SpaceError("parameter with empty name");
    if (!seen.emplace(hp.name, i).second) throw SpaceError("duplicate parameter name: " + hp.name);

    if (hp.kind == ParamKind::categorical) {
      if (hp.choices.empty()) throw SpaceError(hp.name + ": empty choice list");
      std::set<std::string> unique(hp.choices.begin(), hp.choices.end());
      if (unique.size() != hp.choices.size()) throw SpaceError(hp.name + ": duplicate choices");
      hp.lower = 0;
      hp.upper = static_cast<double>(hp.choices.size() - 1);
      if (hp.log_scale) throw SpaceError(hp.name + ": categorical parameters cannot be log-scaled");
    } else {
      if (!(hp.lower < hp.upper)) throw SpaceError(hp.name + ": lower must be < upper");
      if (hp.kind == ParamKind::integer && !(is_integral(hp.lower) && is_integral(hp.upper)))
        throw SpaceError(hp.name + ": integer bounds must be integral");
      if (hp.log_scale && hp.lower <= 0) throw SpaceError(hp.name + ": log scale needs positive bounds");
    }
    if (!hp.contains(hp.default_value)) throw SpaceError(hp.name + ": default outside domain");

    if (hp.condition) {
      auto it = seen.find(hp.condition->parent);
      if (it == seen.end() || it->second == i)
        throw SpaceError(hp.name + ": parent '" + hp.condition->parent + "' must be declared earlier");
      const auto& parent = impl->parameters[it->second];
      if (parent.kind != ParamKind::categorical)
        throw SpaceError(hp.name + ": parent '" + parent.name + "' must be categorical");
      if (hp.condition->values.empty()) throw SpaceError(hp.name + ": condition without values");
      std::vector<bool> mask(parent.choices.size(), false);
      for (const auto& v : hp.condition->values) {
        auto c = std::find(parent.choices.begin(), parent.choices.end(), v);
        if (c == parent.choices.end())
          throw SpaceError(hp.name + ": '" + v + "' is not a choice of " + parent.name);
        mask[static_cast<std::size_t>(c - parent.choices.begin())] = true;
      }
      impl->parent[i] = it->second;
      impl->children[it->second].push_back(i);
      impl->activating[i] = std::move(mask);
    }
  }
  impl_ = std::move(impl);
}

std::optional<std::size_t> ConfigurationSpace::find(std::string_view name) const {
  const auto& ps = impl_->parameters;
  for (std::size_t i = 0; i < ps.size(); ++i)
    if (ps[i].name == name) return i;
  return std::nullopt;
}

std::size_t ConfigurationSpace::index(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw SpaceError("unknown parameter '" + std::string(name) + "' in space " + impl_->name);
}

bool ConfigurationSpace::activated_by(std::size_t i, double parent_choice) const {
  const auto& mask = impl_->activating[i];
  if (mask.empty()) return true;
  if (!is_integral(parent_choice) || parent_choice < 0 || parent_choice >= static_cast<double>(mask.size()))
    return false;
  return mask[static_cast<std::size_t>(parent_choice)];
}

void ConfigurationSpace::normalize(std::vector<std::optional<double>>& values) const {
  const auto& ps = impl_->parameters;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    bool active = true;
    if (auto p = impl_->parent[i]) active = values[*p].has_value() && activated_by(i, *values[*p]);
    if (!active)
      values[i].reset();
    else if (!values[i])
      values[i] = ps[i].default_value;
  }
}

Configuration ConfigurationSpace::default_configuration() const {
  std::vector<std::optional<double>> values(size());
  normalize(values);
  return Configuration(*this, std::move(values));
}

ConfigurationSpace ConfigurationSpace::from_json(const nlohmann::json& j) {
  try {
    std::vector<Hyperparameter> params;
    for (const auto& p : j.at("parameters")) {
      const std::string name = p.at("name").get<std::string>();
      const std::string kind = p.at("kind").get<std::string>();
      const auto& domain = p.at("domain");
      Hyperparameter hp;
      if (kind == "categorical") {
        hp = Hyperparameter::categorical(name, domain.get<std::vector<std::string>>(),
                                         p.at("default").get<std::string>());
      } else if (kind == "continuous" || kind == "integer") {
        if (!domain.is_array() || domain.size() != 2) throw SpaceError(name + ": numeric domain needs [lower, upper]");
        const double lo = domain[0].get<double>();
        const double hi = domain[1].get<double>();
        const double def = p.at("default").get<double>();
        hp = kind == "integer" ? Hyperparameter::integer(name, lo, hi, def)
                               : Hyperparameter::continuous(name, lo, hi, def, p.value("log_scale", false));
      } else {
        throw SpaceError(name + ": unknown kind '" + kind + "'");
      }
      if (p.contains("condition")) {
        const auto& c = p.at("condition");
        hp.condition = Condition{c.at("parent").get<std::string>(), c.at("values").get<std::vector<std::string>>()};
      }
      params.push_back(std::move(hp));
    }
    return ConfigurationSpace(j.at("name").get<std::string>(), std::move(params));
  } catch (const nlohmann::json::exception& e) {
    throw SpaceError(std::string("malformed space JSON: ") + e.what());
  }
}

nlohmann::json ConfigurationSpace::to_json() const {
  nlohmann::json params = nlohmann::json::array();
  for (const auto& hp : parameters()) {
    nlohmann::json p;
    p["name"] = hp.name;
    p["kind"] = std::string(metabo::to_string(hp.kind));
    switch (hp.kind) {
      case ParamKind::categorical:
        p["domain"] = hp.choices;
        p["default"] = hp.choices[static_cast<std::size_t>(hp.default_value)];
        break;
      case ParamKind::integer:
        p["domain"] = {static_cast<std::int64_t>(hp.lower), static_cast<std::int64_t>(hp.upper)};
        p["default"] = static_cast<std::int64_t>(hp.default_value);
        break;
      case ParamKind::continuous:
        p["domain"] = {hp.lower, hp.upper};
        p["default"] = hp.default_value;
        if (hp.log_scale) p["log_scale"] = true;
        break;
    }
    if (hp.condition) p["condition"] = {{"parent", hp.condition->parent}, {"values", hp.condition->values}};
    params.push_back(std::move(p));
  }
  return {{"name", name()}, {"parameters", std::move(params)}};
}

// ---------------------------------------------------------------------------

Configuration::Configuration(ConfigurationSpace space, std::vector<std::optional<double>> values)
    : space_(std::move(space)), values_(std::move(values)) {
  if (values_.size() != space_.size())
    throw SpaceError("configuration has " + std::to_string(values_.size()) + " entries, space " + space_.name() +
                     " has " + std::to_string(space_.size()));
}

bool Configuration::is_active(std::string_view name) const { return values_[space_.index(name)].has_value(); }

double Configuration::number(std::string_view name) const {
  const auto& v = values_[space_.index(name)];
  if (!v) throw SpaceError("parameter '" + std::string(name) + "' is inactive");
  return *v;
}

int Configuration::integer(std::string_view name) const { return static_cast<int>(std::lround(number(name))); }

const std::string& Configuration::choice(std::string_view name) const {
  const auto i = space_.index(name);
  const auto& hp = space_.parameter(i);
  if (hp.kind != ParamKind::categorical) throw SpaceError("parameter '" + hp.name + "' is not categorical");
  if (!values_[i]) throw SpaceError("parameter '" + hp.name + "' is inactive");
  return hp.choices.at(static_cast<std::size_t>(*values_[i]));
}

bool Configuration::flag(std::string_view name) const { return choice(name) == "True"; }

Configuration Configuration::with(std::string_view name, double value) const {
  auto values = values_;
  values[space_.index(name)] = value;
  space_.normalize(values);
  return Configuration(space_, std::move(values));
}

Configuration Configuration::with_choice(std::string_view name, std::string_view choice) const {
  const auto& hp = space_.parameter(space_.index(name));
  auto it = std::find(hp.choices.begin(), hp.choices.end(), choice);
  if (it == hp.choices.end()) throw SpaceError("'" + std::string(choice) + "' is not a choice of " + hp.name);
  return with(name, static_cast<double>(it - hp.choices.begin()));
}

nlohmann::json Configuration::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!values_[i]) continue;
    const auto& hp = space_.parameter(i);
    switch (hp.kind) {
      case ParamKind::categorical: {
        const auto idx = static_cast<std::size_t>(*values_[i]);
        j[hp.name] = idx < hp.choices.size() ? nlohmann::json(hp.choices[idx]) : nlohmann::json(*values_[i]);
        break;
      }
      case ParamKind::integer:
        if (is_integral(*values_[i]))
          j[hp.name] = static_cast<std::int64_t>(*values_[i]);
        else
          j[hp.name] = *values_[i];
        break;
      case ParamKind::continuous: j[hp.name] = *values_[i]; break;
    }
  }
  return j;
}

Configuration Configuration::from_json(const ConfigurationSpace& space, const nlohmann::json& j) {
  std::vector<std::optional<double>> values(space.size());
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto i = space.index(it.key());
    const auto& hp = space.parameter(i);
    if (hp.kind == ParamKind::categorical) {
      if (!it.value().is_string()) throw SpaceError(hp.name + ": expected a choice string");
      const auto s = it.value().get<std::string>();
      auto c = std::find(hp.choices.begin(), hp.choices.end(), s);
      if (c == hp.choices.end()) throw SpaceError("'" + s + "' is not a choice of " + hp.name);
      values[i] = static_cast<double>(c - hp.choices.begin());
    } else {
      if (!it.value().is_number()) throw SpaceError(hp.name + ": expected a number");
      values[i] = it.value().get<double>();
    }
  }
  return Configuration(space, std::move(values));
}

std::string Configuration::id() const {
  const std::string canonical = space_.name() + ":" + to_json().dump();
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(canonical)));
  return buf;
}

bool Configuration::operator==(const Configuration& other) const {
  return space_.name() == other.space_.name() && values_ == other.values_;
}

// ---------------------------------------------------------------------------

double encode_value(const Hyperparameter& hp, double value) {
  switch (hp.kind) {
    case ParamKind::categorical: return value;
    case ParamKind::integer: return (value - hp.lower + 0.5) / (hp.upper - hp.lower + 1.0);
    case ParamKind::continuous:
      if (hp.log_scale) return (std::log(value) - std::log(hp.lower)) / (std::log(hp.upper) - std::log(hp.lower));
      return (value - hp.lower) / (hp.upper - hp.lower);
  }
  return value;
}

double decode_value(const Hyperparameter& hp, double unit) {
  switch (hp.kind) {
    case ParamKind::categorical: {
      const double k = static_cast<double>(hp.choices.size());
      return std::clamp(std::round(unit), 0.0, k - 1.0);
    }
    case ParamKind::integer: {
      const double n = hp.upper - hp.lower + 1.0;
      const double bin = std::min(std::floor(std::clamp(unit, 0.0, 1.0) * n), n - 1.0);
      return hp.lower + bin;
    }
    case ParamKind::continuous: {
      const double u = std::clamp(unit, 0.0, 1.0);
      if (u == 0.0) return hp.lower;
      if (u == 1.0) return hp.upper;
      double v = hp.log_scale ? std::exp(std::log(hp.lower) + u * (std::log(hp.upper) - std::log(hp.lower)))
                              : hp.lower + u * (hp.upper - hp.lower);
      return std::clamp(v, hp.lower, hp.upper);
    }
  }
  return unit;
}

Configuration sample_configuration(const ConfigurationSpace& space, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::optional<double>> values(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (auto p = space.parent_of(i); p && !(values[*p] && space.activated_by(i, *values[*p]))) continue;
    const auto& hp = space.parameter(i);
    switch (hp.kind) {
      case ParamKind::continuous: values[i] = decode_value(hp, unit(rng)); break;
      case ParamKind::integer: {
        std::uniform_int_distribution<long long> d(static_cast<long long>(hp.lower), static_cast<long long>(hp.upper));
        values[i] = static_cast<double>(d(rng));
        break;
      }
      case ParamKind::categorical: {
        std::uniform_int_distribution<std::size_t> d(0, hp.choices.size() - 1);
        values[i] = static_cast<double>(d(rng));
        break;
      }
    }
  }
  return Configuration(space, std::move(values));
}

std::vector<Violation> validate(const ConfigurationSpace& space, const Configuration& config) {
  std::vector<Violation> out;
  if (config.values().size() != space.size() || config.space().name() != space.name()) {
    out.push_back({ViolationKind::out_of_domain, "", "configuration belongs to space " + config.space().name()});
    return out;
  }
  const auto values = config.values();
  for (std::size_t i = 0; i < space.size(); ++i) {
    const auto& hp = space.parameter(i);
    bool should = true;
    if (auto p = space.parent_of(i)) should = values[*p].has_value() && space.activated_by(i, *values[*p]);
    const bool present = values[i].has_value();
    if (should && !present) {
      out.push_back({ViolationKind::missing_active, hp.name, "missing active parameter " + hp.name});
    } else if (!should && present) {
      out.push_back({ViolationKind::inactive_present, hp.name, "inactive parameter present: " + hp.name});
    }
    if (present && !hp.contains(*values[i])) {
      std::string domain;
      if (hp.kind == ParamKind::categorical) {
        domain = "{";
        for (std::size_t c = 0; c < hp.choices.size(); ++c) domain += (c ? "," : "") + hp.choices[c];
        domain += "}";
      } else {
        domain = "[" + format_number(hp.lower) + ", " + format_number(hp.upper) + "]";
      }
      out.push_back({ViolationKind::out_of_domain, hp.name,
                     hp.name + " = " + format_number(*values[i]) + " out of domain " + domain});
    }
  }
  return out;
}

EncodedConfig encode(const ConfigurationSpace& space, const Configuration& config) {
  if (!validate(space, config).empty()) throw SpaceError("cannot encode an invalid configuration");
  const auto n = static_cast<Eigen::Index>(space.size());
  EncodedConfig e{Eigen::VectorXd(n), Eigen::Array<bool, Eigen::Dynamic, 1>(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& hp = space.parameter(static_cast<std::size_t>(i));
    const auto& v = config[static_cast<std::size_t>(i)];
    e.active(i) = v.has_value();
    e.x(i) = encode_value(hp, v ? *v : hp.default_value);
  }
  return e;
}

namespace {

template <typename Map>
Configuration decode_with(const ConfigurationSpace& space, Map&& map_entry) {
  std::vector<std::optional<double>> values(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (auto p = space.parent_of(i); p && !(values[*p] && space.activated_by(i, *values[*p]))) continue;
    values[i] = map_entry(space.parameter(i), i);
  }
  return Configuration(space, std::move(values));
}

}  // namespace

Configuration decode(const ConfigurationSpace& space, const Eigen::Ref<const Eigen::VectorXd>& encoded) {
  if (static_cast<std::size_t>(encoded.size()) != space.size()) throw SpaceError("encoded dimension mismatch");
  return decode_with(space, [&](const Hyperparameter& hp, std::size_t i) {
    return decode_value(hp, encoded(static_cast<Eigen::Index>(i)));
  });
}

Configuration from_unit_cube(const ConfigurationSpace& space, const Eigen::Ref<const Eigen::VectorXd>& u) {
  if (static_cast<std::size_t>(u.size()) != space.size()) throw SpaceError("unit-cube dimension mismatch");
  return decode_with(space, [&](const Hyperparameter& hp, std::size_t i) {
    const double ui = std::clamp(u(static_cast<Eigen::Index>(i)), 0.0, 1.0);
    if (hp.kind == ParamKind::categorical) {
      const double k = static_cast<double>(hp.choices.size());
      return std::min(std::floor(ui * k), k - 1.0);
    }
    return decode_value(hp, ui);
  });
}

std::vector<std::size_t> categorical_dims(const ConfigurationSpace& space) {
  std::vector<std::size_t> dims;
  for (std::size_t i = 0; i < space.size(); ++i)
    if (space.parameter(i).kind == ParamKind::categorical) dims.push_back(i);
  return dims;
}

std::vector<Configuration> neighbors(const ConfigurationSpace& space, const Configuration& config, Rng& rng,
                                     std::size_t count) {
  std::vector<std::size_t> movable;
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (!config[i]) continue;
    const auto& hp = space.parameter(i);
    if (hp.kind == ParamKind::categorical && hp.choices.size() < 2) continue;
    movable.push_back(i);
  }
  std::vector<Configuration> out;
  if (movable.empty()) return out;
  out.reserve(count);

  std::normal_distribution<double> step(0.0, kNeighborStepScale);
  std::uniform_int_distribution<std::size_t> pick(0, movable.size() - 1);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t i = movable[pick(rng)];
    const auto& hp = space.parameter(i);
    const double current = *config[i];
    double next = current;
    if (hp.kind == ParamKind::categorical) {
      std::uniform_int_distribution<std::size_t> other(0, hp.choices.size() - 2);
      std::size_t c = other(rng);
      if (static_cast<double>(c) >= current) ++c;
      next = static_cast<double>(c);
    } else {
      const double u = encode_value(hp, current);
      for (int attempt = 0; attempt < 16 && next == current; ++attempt)
        next = decode_value(hp, std::clamp(u + step(rng), 0.0, 1.0));
      if (next == current) {
        // Stuck on a bound or inside one integer bin: move one unit inwards.
        if (hp.kind == ParamKind::integer)
          next = current < hp.upper ? current + 1.0 : current - 1.0;
        else
          next = decode_value(hp, u < 0.5 ? u + kNeighborStepScale : u - kNeighborStepScale);
      }
    }
    auto values = std::vector<std::optional<double>>(config.values().begin(), config.values().end());
    values[i] = next;
    // Children that stay active keep their values; newly active ones get defaults.
    space.normalize(values);
    out.emplace_back(space, std::move(values));
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

const std::map<std::string, ConfigurationSpace, std::less<>>& bundled_spaces() {
  static const auto spaces = [] {
    std::map<std::string, ConfigurationSpace, std::less<>> m;
    for (const auto& [name, source] : detail::bundled_space_sources())
      m.emplace(std::string(name), ConfigurationSpace::from_json(nlohmann::json::parse(source)));
    return m;
  }();
  return spaces;
}

}  // namespace

ConfigurationSpace bundled_space(std::string_view name) {
  const auto& spaces = bundled_spaces();
  auto it = spaces.find(name);
  if (it == spaces.end()) throw SpaceError("no bundled space named '" + std::string(name) + "'");
  return it->second;
}

std::vector<std::string> bundled_space_names() {
  std::vector<std::string> names;
  for (const auto& [name, space] : bundled_spaces()) names.push_back(name);
  return names;
}

}  // namespace metabo
