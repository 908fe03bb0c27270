#include "metabo/bo.hpp"

#include <charconv>
#include <cmath>
#include <limits>

namespace metabo {

std::string_view to_string(ModelFamily family) {
  switch (family) {
    case ModelFamily::rf: return "rf";
    case ModelFamily::gp_ml: return "gp_ml";
    case ModelFamily::gp_map: return "gp_map";
    case ModelFamily::gp_mcmc: return "gp_mcmc";
  }
  return "?";
}

std::string bo_space_name(ModelFamily family) { return "bo_" + std::string(to_string(family)); }

ModelFamily model_family(const ConfigurationSpace& space) {
  const auto& name = space.name();
  if (name == "bo_rf") return ModelFamily::rf;
  if (name == "bo_gp_ml") return ModelFamily::gp_ml;
  if (name == "bo_gp_map") return ModelFamily::gp_map;
  if (name == "bo_gp_mcmc") return ModelFamily::gp_mcmc;
  if (space.find("num_trees")) return ModelFamily::rf;
  if (space.find("prior_cov_ampl"))
    return name.find("mcmc") != std::string::npos ? ModelFamily::gp_mcmc : ModelFamily::gp_map;
  return ModelFamily::gp_ml;
}

namespace {

template <typename F>
void if_active(const Configuration& c, std::string_view name, F&& f) {
  if (c.space().find(name) && c.is_active(name)) f();
}

HyperPrior gamma_prior(const Configuration& c, const std::string& prefix) {
  return HyperPrior::gamma(c.number(prefix + "_gamma_a"), c.number(prefix + "_gamma_scale"));
}

}  // namespace

BOSettings bo_settings(const Configuration& c) {
  BOSettings s;
  s.family = model_family(c.space());

  if_active(c, "acq_func", [&] {
    const auto& a = c.choice("acq_func");
    s.acquisition.kind = a == "LCB" ? AcquisitionKind::lcb : a == "PI" ? AcquisitionKind::pi : AcquisitionKind::ei;
  });
  if_active(c, "par", [&] { s.acquisition.par = c.number("par"); });
  if_active(c, "lcb_par", [&] { s.acquisition.lcb_par = c.number("lcb_par"); });
  if_active(c, "init_design", [&] {
    const auto& d = c.choice("init_design");
    s.design = d == "LHD" ? DesignKind::lhd : d == "Sobol" ? DesignKind::sobol : DesignKind::random;
  });
  if_active(c, "n_configs_x_params", [&] { s.n_configs_x_params = c.integer("n_configs_x_params"); });
  if_active(c, "y_trans", [&] {
    const auto& t = c.choice("y_trans");
    s.y_trans = t == "LogScaled(y)" ? YTransform::log_scaled
                : t == "InvScaled(y)" ? YTransform::inv_scaled
                                      : YTransform::identity;
  });
  if_active(c, "scale_log_perc", [&] { s.y_perc = c.integer("scale_log_perc"); });
  if_active(c, "scale_inv_perc", [&] { s.y_perc = c.integer("scale_inv_perc"); });
  if_active(c, "rand_prob", [&] { s.rand_prob = c.number("rand_prob"); });

  if_active(c, "num_trees", [&] { s.rf.num_trees = c.integer("num_trees"); });
  if_active(c, "do_bootstrapping", [&] { s.rf.do_bootstrapping = c.flag("do_bootstrapping"); });
  if_active(c, "min_samples_leaf", [&] { s.rf.min_samples_leaf = c.integer("min_samples_leaf"); });
  if_active(c, "min_samples_split", [&] { s.rf.min_samples_split = c.integer("min_samples_split"); });
  if_active(c, "ratio_features", [&] { s.rf.ratio_features = c.number("ratio_features"); });
  if_active(c, "log_y_in_tree", [&] { s.rf.log_y_in_tree = c.flag("log_y_in_tree"); });

  auto& gp = s.gp;
  gp.mode = s.family == ModelFamily::gp_mcmc  ? FitMode::mcmc
            : s.family == ModelFamily::gp_map ? FitMode::map
                                              : FitMode::ml;
  if_active(c, "ard", [&] { gp.kernel.ard = c.flag("ard"); });
  if_active(c, "kernel", [&] {
    gp.kernel.base = c.choice("kernel") == "matern" ? KernelType::matern52 : KernelType::rbf;
  });
  if_active(c, "ls_lower_bound", [&] { gp.ls_lower = c.number("ls_lower_bound"); });
  if_active(c, "ls_upper_bound", [&] { gp.ls_upper = c.number("ls_upper_bound"); });
  if_active(c, "tune_noise", [&] { gp.tune_noise = c.flag("tune_noise"); });
  if (gp.mode != FitMode::ml) {
    if_active(c, "prior_cov_ampl", [&] {
      gp.priors.amplitude = c.choice("prior_cov_ampl") == "Gamma"
                                ? gamma_prior(c, "prior_cov_ampl")
                                : HyperPrior::lognormal(c.number("prior_cov_ampl_lognormal_sigma"));
    });
    if_active(c, "prior_ls", [&] {
      gp.priors.lengthscale = c.choice("prior_ls") == "Gamma" ? gamma_prior(c, "prior_ls") : HyperPrior::none();
    });
    if_active(c, "prior_noise", [&] {
      gp.priors.noise = c.choice("prior_noise") == "Gamma"
                            ? gamma_prior(c, "prior_noise")
                            : HyperPrior::horseshoe(c.number("prior_noise_horseshoe_scale"));
    });
  }
  return s;
}

Rng derive_stream(std::uint64_t seed, std::uint64_t iteration, std::uint64_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(iteration), static_cast<std::uint32_t>(tag)};
  return Rng(seq);
}

namespace {

std::vector<EncodedConfig> encode_all(const ConfigurationSpace& space, const History& h) {
  std::vector<EncodedConfig> out;
  out.reserve(h.size());
  for (const auto& c : h.configs) out.push_back(encode(space, c));
  return out;
}

Configuration propose(const ConfigurationSpace& space, const History& history, const BOSettings& s, Rng& rng,
                      const RunOptions& options) {
  const auto z = transform_y(history.ys, s.y_trans, s.y_perc);
  const double f_star = *std::min_element(z.begin(), z.end());
  const auto inputs = encode_all(space, history);
  const auto categorical = categorical_dims(space);

  if (s.family == ModelFamily::rf) {
    const Forest forest = fit_forest(inputs, z, categorical, s.rf, rng);
    auto acq = [&](const Configuration& c) {
      const Prediction p = forest.predict(encode(space, c));
      return acquisition_value(s.acquisition, p, f_star);
    };
    return optimize_acquisition(acq, space, history, rng, options.ils).config;
  }

  GPFitOptions gp_opt = s.gp;
  gp_opt.kernel.categorical_dims = categorical;
  const FittedGP gp = fit(make_gp_data(inputs, z), gp_opt, rng);
  auto acq = [&](const Configuration& c) {
    const auto preds = gp.predict(encode(space, c));
    return acquire(s.acquisition, preds, f_star);
  };
  return optimize_acquisition(acq, space, history, rng, options.ils).config;
}

}  // namespace

Trajectory run_bo(const ObjectiveFunction& objective, const Configuration& lambda, std::size_t budget,
                  std::uint64_t seed, const RunOptions& options) {
  const BOSettings s = bo_settings(lambda);
  const auto& space = objective.space();
  Trajectory traj;
  traj.function_id = objective.id();
  traj.lambda_id = lambda.id();
  traj.seed = seed;

  Rng rng = derive_stream(seed, 0, 0);
  const std::size_t n0 = std::min<std::size_t>(
      budget, static_cast<std::size_t>(std::max(1, s.n_configs_x_params)) * std::max<std::size_t>(1, space.size()));
  traj.initial_design_size = n0;

  auto evaluate = [&](Configuration x) {
    double y = 0.0;
    try {
      y = objective.evaluate(x);
    } catch (const std::exception& e) {
      traj.valid = false;
      traj.error = e.what();
      return false;
    }
    if (!std::isfinite(y)) {
      traj.valid = false;
      traj.error = "objective returned a non-finite value";
      return false;
    }
    traj.best.push_back(traj.best.empty() ? y : std::min(traj.best.back(), y));
    traj.history.add(std::move(x), y);
    return true;
  };

  if (budget == 0) return traj;
  for (auto& x : initial_design(s.design, space, n0, rng))
    if (!evaluate(std::move(x))) return traj;

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::size_t t = n0; t < budget; ++t) {
    const bool random_step = unif(rng) < s.rand_prob;
    std::optional<Configuration> x;
    if (!random_step) {
      Rng model_rng = derive_stream(seed, t, 1);
      try {
        x = propose(space, traj.history, s, model_rng, options);
      } catch (const GPFitError&) {
        ++traj.model_failures;
      }
    }
    if (!x) x = sample_configuration(space, rng);
    if (!evaluate(std::move(*x))) return traj;
  }
  return traj;
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, end);
}

std::string trajectory_csv(const Trajectory& traj) {
  std::string out = "step,raw_best,query_json\n";
  for (std::size_t i = 0; i < traj.best.size(); ++i) {
    std::string q = traj.history.configs[i].to_json().dump();
    std::string quoted;
    quoted.reserve(q.size() + 2);
    quoted += '"';
    for (char ch : q) {
      if (ch == '"') quoted += '"';
      quoted += ch;
    }
    quoted += '"';
    out += std::to_string(i + 1) + "," + format_double(traj.best[i]) + "," + quoted + "\n";
  }
  return out;
}

nlohmann::json trajectory_json(const Trajectory& traj, const Configuration& lambda) {
  nlohmann::json queries = nlohmann::json::array();
  for (const auto& c : traj.history.configs) queries.push_back(c.to_json());
  return {{"function", traj.function_id},
          {"seed", traj.seed},
          {"lambda_id", traj.lambda_id},
          {"bo_space", lambda.space().name()},
          {"lambda", lambda.to_json()},
          {"budget", traj.best.size()},
          {"initial_design_size", traj.initial_design_size},
          {"raw_best", traj.best},
          {"ys", traj.history.ys},
          {"queries", queries},
          {"model_failures", traj.model_failures},
          {"valid", traj.valid},
          {"error", traj.error}};
}

}  // namespace metabo
