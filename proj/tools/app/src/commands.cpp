#include "treemax_app/commands.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "treemax/certificate.hpp"
#include "treemax/io.hpp"
#include "treemax/model.hpp"
#include "treemax/roots.hpp"
#include "treemax/simulate.hpp"
#include "treemax/symmetry.hpp"
#include "treemax/tails.hpp"
#include "treemax_app/config.hpp"

namespace treemax::app {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

json interval(const Interval& i) { return json::array({number(i.lo), number(i.hi)}); }

json estimate_json(const TailEstimate& e) {
  json j;
  if (e.alpha_hat) j["alpha_hat"] = number(*e.alpha_hat);
  if (e.h_hat) j["value"] = number(*e.h_hat);
  j["se"] = number(e.se);
  j["ci95"] = interval(e.ci);
  j["method"] = to_string(e.method);
  j["n_used"] = e.n_used;
  return j;
}

json estimate_json(const Estimate& e) {
  return {{"value", number(e.value)}, {"se", number(e.se)}, {"closed_form", e.closed_form}};
}

struct Plan {
  bool roots = false;
  bool roots_optional = false;
  bool simulate = false;
  bool tails = false;
  bool constants = false;
  bool certificate = false;
  bool symmetry = false;
};

Plan plan_for(const std::string& command, const ExperimentConfig& cfg) {
  Plan p;
  if (command == "solve-root") {
    p.roots = true;
  } else if (command == "simulate") {
    p.roots = p.simulate = true;
    p.roots_optional = cfg.run.depth.has_value();
  } else if (command == "tail") {
    p.roots = p.simulate = p.tails = true;
  } else if (command == "constant") {
    p.roots = p.simulate = p.constants = true;
  } else if (command == "certify") {
    p.roots = p.certificate = true;
  } else if (command == "symmetry-check") {
    p.symmetry = true;
  } else if (command == "pipeline") {
    p.roots = p.simulate = p.tails = p.constants = true;
    p.certificate = cfg.estimate.certificate;
    p.symmetry = cfg.estimate.symmetry.has_value();
  } else {
    throw Error(ErrorCode::ConfigError, "unknown command '" + command + "'");
  }
  return p;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
  out << text;
}

std::string csv_row(std::initializer_list<double> values) {
  std::string row;
  bool first = true;
  for (double v : values) {
    if (!first) row += ',';
    row += format_double(v);
    first = false;
  }
  return row + '\n';
}

bool has_estimator(const ExperimentConfig& cfg, const std::string& name) {
  if (cfg.estimate.estimators) {
    for (const auto& e : *cfg.estimate.estimators)
      if (e == name) return true;
    return false;
  }
  const bool linear = cfg.run.mode == Functional::linear;
  if (name == "linear_k") return linear || cfg.run.mode == Functional::both_coupled;
  if (name == "expectation" || name == "integral" || name == "negative_tail") return !linear;
  return true;
}

class Runner {
 public:
  Runner(std::string command, ExperimentConfig cfg, fs::path dir, std::ostream& out, std::ostream& err)
      : command_(std::move(command)), cfg_(std::move(cfg)), dir_(std::move(dir)), out_(out), err_(err) {}

  int run() {
    const Plan plan = plan_for(command_, cfg_);
    fs::create_directories(dir_);
    fs::remove(dir_ / "FAILED");
    summary_["command"] = command_;
    summary_["status"] = "running";
    summary_["config"] = config_json();
    try {
      stage("validate", [&] { validate(); });
      if (plan.roots) {
        if (plan.roots_optional) {
          try {
            stage("roots", [&] { roots(); });
          } catch (const Error& e) {
            summary_["roots"] = {{"skipped", e.what()}};
          }
        } else {
          stage("roots", [&] { roots(); });
        }
      }
      if (plan.simulate) stage("simulate", [&] { simulate(); });
      if (plan.tails) stage("tails", [&] { tails(); });
      if (plan.constants) stage("constants", [&] { constants(); });
      if (plan.certificate) stage("certificate", [&] { certificate(); });
      if (plan.symmetry) stage("symmetry", [&] { symmetry(); });
    } catch (const Error& e) {
      return fail(e.code(), e.what());
    } catch (const std::exception& e) {
      return fail(ErrorCode::ReplicaFailed, e.what());
    }
    summary_["status"] = "ok";
    flush();
    out_ << "wrote " << (dir_ / "summary.json").string() << '\n';
    return kOk;
  }

 private:
  int fail(ErrorCode code, const std::string& message) {
    summary_["status"] = "FAILED";
    summary_["failed_stage"] = stage_;
    summary_["error"] = {{"code", std::string(to_string(code))}, {"message", message}};
    flush();
    write_text(dir_ / "FAILED", stage_ + ": " + message + "\n");
    err_ << "stage " << stage_ << " failed: " << message << '\n';
    return exit_code_for(code);
  }

  template <class F>
  void stage(const std::string& name, F&& f) {
    stage_ = name;
    f();
    flush();
  }

  void flush() { write_text(dir_ / "summary.json", summary_.dump(2) + "\n"); }

  json config_json() const {
    json j;
    j["seed"] = cfg_.run.seed;
    j["replicas"] = cfg_.run.replicas;
    j["depth"] = cfg_.run.depth ? json(*cfg_.run.depth) : json(nullptr);
    j["target_trunc_error"] = cfg_.run.target_trunc_error ? json(*cfg_.run.target_trunc_error) : json(nullptr);
    j["trunc_epsilon"] = cfg_.run.trunc_epsilon;
    j["mode"] = to_string(cfg_.run.mode);
    j["iterated"] = cfg_.run.terminal.has_value();
    j["n_mc"] = cfg_.estimate.n_mc;
    return j;
  }

  RecursionKind kind() const {
    return cfg_.run.mode == Functional::linear ? RecursionKind::linear : RecursionKind::max;
  }

  void validate() {
    const ValidationReport report = validate_model(cfg_.model, kind());
    json items = json::array();
    for (const auto& item : report.items) {
      items.push_back({{"name", item.name}, {"status", to_string(item.status)}, {"detail", item.detail}});
    }
    summary_["validation"] = items;
  }

  void roots() {
    RootSolveOptions opt;
    opt.bracket = cfg_.estimate.bracket;
    opt.tol = cfg_.estimate.tol;
    opt.n_mc = cfg_.estimate.n_mc;
    opt.seed = cfg_.run.seed;
    root_ = solve_alpha(cfg_.model, opt);
    json r;
    r["alpha"] = number(root_->alpha);
    r["mu_alpha"] = number(root_->mu_alpha);
    r["mu_alpha_se"] = number(root_->mu_alpha_se);
    r["residual"] = number(root_->residual);
    r["method"] = to_string(root_->method);
    r["ci95"] = root_->ci ? interval(*root_->ci) : json(nullptr);
    summary_["roots"] = r;
    flush();

    profile_ = select_beta(cfg_.model, root_->alpha, cfg_.estimate.n_mc, cfg_.run.seed);
    summary_["contraction"] = {{"beta", number(profile_->beta)},     {"rho_beta", number(profile_->rho_beta)},
                               {"rho_se", number(profile_->rho_se)}, {"q_beta", number(profile_->q_beta)},
                               {"q_beta_se", number(profile_->q_beta_se)}, {"usable", profile_->usable}};

    const ConditionReport conditions = check_conditions(cfg_.model, root_->alpha, {0.1, 0.25, 0.5, 0.75},
                                                        cfg_.estimate.n_mc, cfg_.run.seed);
    json items = json::array();
    for (const auto& item : conditions.items) {
      items.push_back({{"name", item.name},
                       {"value", number(item.value)},
                       {"se", number(item.se)},
                       {"status", to_string(item.status)},
                       {"detail", item.detail}});
    }
    summary_["conditions"] = {{"alpha_above_one", conditions.alpha_above_one},
                              {"moment_condition_ok", conditions.moment_condition_ok},
                              {"diagnostic_only", true},
                              {"items", items}};
  }

  double truncation_moment() const {
    if (!cfg_.run.terminal) return profile_->q_beta;
    if (const auto m = abs_moment(*cfg_.run.terminal, profile_->beta)) return *m;
    double sum = 0.0;
    const std::size_t n = 100000;
    for (std::size_t k = 0; k < n; ++k) {
      CounterStream s = aux_stream(cfg_.run.seed, stream_tag::outer, k);
      sum += std::pow(std::abs(sample(*cfg_.run.terminal, s)), profile_->beta);
    }
    return sum / static_cast<double>(n);
  }

  void simulate() {
    std::optional<TruncationInput> trunc;
    if (profile_ && profile_->usable) {
      trunc = TruncationInput{*profile_, truncation_moment(), cfg_.run.trunc_epsilon};
    }
    std::uint32_t depth = 0;
    if (cfg_.run.depth) {
      depth = *cfg_.run.depth;
    } else {
      if (!trunc) throw Error(ErrorCode::UnusableProfile, "target_trunc_error needs a usable contraction profile");
      depth = depth_for_target(trunc->profile, trunc->moment, trunc->epsilon, *cfg_.run.target_trunc_error);
    }
    TraversalConfig tc;
    tc.depth = depth;
    tc.mode = cfg_.run.mode;
    tc.terminal_law = cfg_.run.terminal;
    tc.prune_zero = cfg_.run.prune_zero;
    if (tc.terminal_law && tc.depth < 1) throw Error(ErrorCode::InvalidArgument, "iterated run needs depth >= 1");

    samples_ = run_replicas(cfg_.model, tc, cfg_.run.replicas, cfg_.run.seed, cfg_.run.parallelism, trunc);
    save_sample_set(*samples_, dir_ / "samples");

    json s;
    s["file"] = "samples.csv";
    s["meta"] = "samples.meta.json";
    s["replicas"] = samples_->replica_count;
    s["depth"] = samples_->depth;
    s["mode"] = to_string(samples_->mode);
    s["iterated"] = samples_->iterated;
    s["log_domain"] = samples_->log_domain;
    summary_["samples"] = s;
    if (samples_->trunc_bound) {
      const TruncationBound& b = *samples_->trunc_bound;
      summary_["truncation"] = {{"beta", number(b.beta)},       {"rho_beta", number(b.rho_beta)},
                                {"moment", number(b.moment)},   {"epsilon", number(b.epsilon)},
                                {"depth", b.depth},             {"bound", number(b.bound)}};
    } else {
      summary_["truncation"] = {{"bound", nullptr}, {"note", "no usable contraction profile"}};
    }

    // Moment bound E|R|^beta <= E|Q|^beta / (1 - rho_beta).
    if (profile_ && profile_->usable && !samples_->log_domain && !samples_->iterated) {
      double sum = 0.0, sum_sq = 0.0;
      for (double v : samples_->values) {
        const double x = std::pow(std::abs(v), profile_->beta);
        sum += x;
        sum_sq += x * x;
      }
      const auto n = static_cast<double>(samples_->values.size());
      const double mean = sum / n;
      const double se = n > 1 ? std::sqrt(std::max(0.0, (sum_sq - n * mean * mean) / (n - 1)) / n) : 0.0;
      const double bound = profile_->q_beta / (1.0 - profile_->rho_beta);
      summary_["moment_bound"] = {{"beta", number(profile_->beta)}, {"sample_mean", number(mean)},
                                  {"se", number(se)},               {"bound", number(bound)},
                                  {"holds", mean <= bound + 3.0 * se}};
    }
  }

  std::vector<double> tail_values() const {
    if (samples_->log_domain) {
      throw Error(ErrorCode::Overflow, "samples are in log domain; tail estimators need linear values");
    }
    std::vector<double> x = samples_->values;
    if (samples_->mode == Functional::linear) {
      for (double& v : x) v = std::abs(v);
    }
    return x;
  }

  std::vector<double> ccdf_grid(const std::vector<double>& x) const {
    if (cfg_.estimate.ccdf_grid) {
      const GridSpec& g = *cfg_.estimate.ccdf_grid;
      return log_grid(g.lo, g.hi, g.points);
    }
    std::vector<double> pos;
    for (double v : x)
      if (v > 0.0) pos.push_back(v);
    if (pos.size() < 2) throw Error(ErrorCode::EmptyGrid, "fewer than two positive samples");
    std::sort(pos.begin(), pos.end());
    const double lo = sorted_quantile(pos, 0.5);
    const double hi = std::max(lo, sorted_quantile(pos, 0.999));
    return log_grid(lo, hi, hi > lo ? 30 : 1);
  }

  void tails() {
    const std::vector<double> x = tail_values();
    const std::vector<double> grid = ccdf_grid(x);
    const double alpha = root_ ? root_->alpha : std::nan("");
    json t;
    if (has_estimator(cfg_, "ccdf")) {
      std::string csv = "t,ccdf,se,scaled,scaled_se\n";
      for (const CcdfPoint& p : empirical_ccdf(x, grid)) {
        const double scale = std::pow(p.t, alpha);
        csv += csv_row({p.t, p.p, p.se, p.p * scale, p.se * scale});
      }
      write_text(dir_ / "ccdf.csv", csv);
      t["ccdf"] = {{"file", "ccdf.csv"}, {"points", grid.size()}};
    }
    if (has_estimator(cfg_, "hill")) {
      const std::size_t n = x.size();
      std::size_t k = cfg_.estimate.hill_k.value_or(std::max<std::size_t>(10, n / 100));
      k = std::min(k, n - 1);
      json h = estimate_json(hill_estimator(x, k));
      h["k"] = k;
      t["hill"] = h;
    }
    if (has_estimator(cfg_, "negative_tail") && samples_->mode != Functional::linear) {
      const NegativeTailReport report = negative_tail_check(samples_->values, alpha, grid, &cfg_.model);
      std::string csv = "t,p,se,scaled,envelope\n";
      for (const auto& row : report.rows) {
        csv += csv_row({row.t, row.p, row.se, row.scaled, row.envelope.value_or(std::nan(""))});
      }
      write_text(dir_ / "negative_tail.csv", csv);
      t["negative_tail"] = {{"file", "negative_tail.csv"}, {"within_envelope", report.within_envelope}};
    }
    summary_["tails"] = t;
  }

  void constants() {
    if (!root_) throw Error(ErrorCode::InvalidArgument, "constants need the roots stage");
    const std::vector<double>& values = samples_->values;
    if (samples_->log_domain) throw Error(ErrorCode::Overflow, "samples are in log domain");
    json c;
    const bool max_like = samples_->mode == Functional::max || samples_->mode == Functional::both_coupled;
    std::optional<TailEstimate> h_exp, h_int;
    if (max_like && has_estimator(cfg_, "expectation")) {
      h_exp = estimate_H_expectation(cfg_.model, root_->alpha, root_->mu_alpha, values,
                                     {cfg_.estimate.n_outer, cfg_.run.seed});
      c["h_expectation"] = estimate_json(*h_exp);
    }
    if (max_like && has_estimator(cfg_, "integral")) {
      HIntegralOptions opt;
      opt.v_max = cfg_.estimate.v_max;
      opt.n_weights = cfg_.estimate.n_weights;
      opt.seed = cfg_.run.seed;
      const HIntegralResult r = estimate_H_integral(cfg_.model, root_->alpha, root_->mu_alpha, values, opt);
      h_int = r.estimate;
      json j = estimate_json(r.estimate);
      j["v_max"] = number(r.v_max);
      j["cancellation_warning"] = r.cancellation_warning;
      j["straddle_fraction"] = number(r.straddle_fraction);
      j["integrand_file"] = "integrand.csv";
      c["h_integral"] = j;
      std::string csv = "v,integrand,se\n";
      for (const auto& p : r.integrand) csv += csv_row({p.v, p.value, p.se});
      write_text(dir_ / "integrand.csv", csv);
    }
    if (h_exp && h_int) {
      const double diff = *h_exp->h_hat - *h_int->h_hat;
      const double se = std::hypot(h_exp->se, h_int->se);
      c["consistency"] = {{"difference", number(diff)}, {"joint_se", number(se)},
                          {"within_3se", std::abs(diff) <= 3.0 * se}};
    }
    const bool linear_like = samples_->mode == Functional::linear || samples_->mode == Functional::both_coupled;
    if (linear_like && has_estimator(cfg_, "linear_k")) {
      const std::vector<double>& rl =
          samples_->mode == Functional::both_coupled ? *samples_->paired_values : values;
      const Estimate mu = moment_abs_mlog(cfg_.model, root_->alpha, cfg_.estimate.n_mc, cfg_.run.seed);
      json k = estimate_json(
          estimate_K_linear(cfg_.model, root_->alpha, mu.value, rl, {cfg_.estimate.n_outer, cfg_.run.seed}));
      k["mu_abs"] = estimate_json(mu);
      c["k_linear"] = k;
    }
    if (samples_->trunc_bound) c["trunc_bound"] = number(samples_->trunc_bound->bound);
    summary_["constants"] = c;
  }

  void certificate() {
    if (!root_ || !profile_) throw Error(ErrorCode::InvalidArgument, "certificate needs the roots stage");
    CertificateOptions opt;
    opt.n_mc = cfg_.estimate.n_mc;
    opt.seed = cfg_.run.seed;
    const PositivityCertificate c = certify_H_positive(cfg_.model, root_->alpha, root_->mu_alpha, *profile_, opt);
    summary_["certificate"] = {{"status", "certified"},
                               {"delta", number(c.delta)},
                               {"beta", number(c.beta)},
                               {"rho_beta", number(c.rho_beta)},
                               {"q", number(c.q)},
                               {"r", c.r},
                               {"r_a", c.r_a},
                               {"r_b", c.r_b},
                               {"binding", c.binding},
                               {"k_const", number(c.k_const)},
                               {"d_beta_moment", number(c.d_beta_moment)},
                               {"d_beta_moment_closed", number(c.d_beta_moment_closed)},
                               {"q_pos_alpha", number(c.q_pos_alpha)},
                               {"q_pos_beta", number(c.q_pos_beta)},
                               {"weight_power_sum", number(c.weight_power_sum)},
                               {"condition_a", number(c.condition_a)},
                               {"condition_b", number(c.condition_b)},
                               {"lower_bound", number(c.lower_bound)},
                               {"h_lower_bound", number(c.h_lower_bound)}};
  }

  void symmetry() {
    const SymmetrySection sec = cfg_.estimate.symmetry.value_or(SymmetrySection{});
    const std::vector<double> grid = log_grid(sec.t_grid.lo, sec.t_grid.hi, sec.t_grid.points);
    CheckOptions opt;
    opt.depth = sec.depth;
    opt.replicas = sec.replicas;
    opt.seed = cfg_.run.seed;
    opt.parallelism = cfg_.run.parallelism;
    json s;
    s["band_se"] = 3.0;
    try {
      const SymmetrizedModel sym = symmetrize_model(cfg_.model);
      const LevyReport levy = check_levy_inequality(sym, grid, opt);
      std::string csv = "t,p_linear,p_max,margin,se,violated\n";
      for (const auto& r : levy.rows) csv += csv_row({r.t, r.p_linear, r.p_max, r.margin, r.se, r.violated ? 1.0 : 0.0});
      write_text(dir_ / "levy.csv", csv);
      s["levy"] = {{"file", "levy.csv"}, {"violations", levy.violations}, {"depth", levy.depth},
                   {"replicas", levy.replicas}};
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateSymmetrization) throw;
      s["levy"] = {{"skipped", true}, {"note", e.what()}};
    }
    const SandwichReport sw = check_sandwich(cfg_.model, grid, opt);
    if (sw.skipped) {
      s["sandwich"] = {{"skipped", true}, {"note", sw.note}};
    } else {
      std::string csv = "t,p_symmetric,p_linear,margin,se,checked,violated\n";
      for (const auto& r : sw.rows) {
        csv += csv_row({r.t, r.p_symmetric, r.p_linear, r.margin, r.se, r.checked ? 1.0 : 0.0,
                        r.violated ? 1.0 : 0.0});
      }
      write_text(dir_ / "sandwich.csv", csv);
      s["sandwich"] = {{"file", "sandwich.csv"}, {"violations", sw.violations},
                       {"pathwise_violations", sw.pathwise_violations}};
    }
    summary_["symmetry"] = s;
  }

  std::string command_;
  ExperimentConfig cfg_;
  fs::path dir_;
  std::ostream& out_;
  std::ostream& err_;
  json summary_;
  std::string stage_ = "config";
  std::optional<RootSolveResult> root_;
  std::optional<ContractionProfile> profile_;
  std::optional<SampleSet> samples_;
};

ExperimentConfig load_with_overrides(const fs::path& path, const Overrides& o) {
  ExperimentConfig cfg = load_config(path);
  if (o.seed) cfg.run.seed = *o.seed;
  if (o.parallelism) cfg.run.parallelism = *o.parallelism;
  if (o.out) cfg.output.directory = *o.out;
  return cfg;
}

}  // namespace

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError: return kConfigError;
    case ErrorCode::RejectedModel: return kRejected;
    default: return kStageFailure;
  }
}

int cmd_validate(const fs::path& config, const Overrides& overrides, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg;
  try {
    cfg = load_with_overrides(config, overrides);
  } catch (const Error& e) {
    err << e.what() << '\n';
    return exit_code_for(e.code());
  }
  try {
    const RecursionKind kind = cfg.run.mode == Functional::linear ? RecursionKind::linear : RecursionKind::max;
    const ValidationReport report = validate_model(cfg.model, kind);
    for (const auto& item : report.items) {
      out << std::left << std::setw(28) << item.name << ' ' << std::setw(13) << to_string(item.status) << ' '
          << item.detail << '\n';
    }
    try {
      RootSolveOptions opt;
      opt.bracket = cfg.estimate.bracket;
      opt.tol = cfg.estimate.tol;
      opt.n_mc = cfg.estimate.n_mc;
      opt.seed = cfg.run.seed;
      const RootSolveResult r = solve_alpha(cfg.model, opt);
      out << "alpha                        " << format_double(r.alpha) << " (" << to_string(r.method) << ")\n";
      const ContractionProfile p = select_beta(cfg.model, r.alpha, cfg.estimate.n_mc, cfg.run.seed);
      out << "beta                         " << format_double(p.beta) << " rho_beta "
          << format_double(p.rho_beta) << '\n';
    } catch (const Error& e) {
      out << "roots                        note         " << e.what() << '\n';
    }
    return report.ok() ? kOk : kRejected;
  } catch (const Error& e) {
    err << e.what() << '\n';
    return exit_code_for(e.code());
  }
}

int cmd_run(const std::string& command, const fs::path& config, const Overrides& overrides, std::ostream& out,
            std::ostream& err) {
  ExperimentConfig cfg;
  try {
    cfg = load_with_overrides(config, overrides);
    plan_for(command, cfg);
  } catch (const Error& e) {
    err << e.what() << '\n';
    return exit_code_for(e.code());
  }
  const fs::path dir = cfg.output.directory;
  Runner runner(command, std::move(cfg), dir, out, err);
  return runner.run();
}

namespace {

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::string show(const json& j) {
  if (j.is_null()) return "-";
  if (j.is_number_float()) {
    std::ostringstream s;
    s << std::setprecision(6) << j.get<double>();
    return s.str();
  }
  if (j.is_string()) return j.get<std::string>();
  return j.dump();
}

std::string show_estimate(const json& e) {
  std::string s = show(e.contains("value") ? e["value"] : e.value("alpha_hat", json()));
  s += " +- " + show(e["se"]);
  if (e.contains("ci95")) s += "  CI95 [" + show(e["ci95"][0]) + ", " + show(e["ci95"][1]) + "]";
  return s;
}

}  // namespace

int cmd_report(const fs::path& dir, std::ostream& out, std::ostream& err) {
  const fs::path summary_path = dir / "summary.json";
  if (!fs::exists(summary_path)) {
    err << to_string(ErrorCode::MissingArtifacts) << ": " << summary_path.string() << " not found\n";
    return exit_code_for(ErrorCode::MissingArtifacts);
  }
  json s;
  try {
    std::ifstream in(summary_path);
    s = json::parse(in);
  } catch (const std::exception& e) {
    err << to_string(ErrorCode::MissingArtifacts) << ": unreadable summary: " << e.what() << '\n';
    return exit_code_for(ErrorCode::MissingArtifacts);
  }

  std::ostringstream r;
  r << "treemax report: " << dir.string() << "\n";
  r << "command " << show(s.value("command", json())) << ", status " << show(s.value("status", json()));
  if (s.contains("failed_stage")) r << " (failed stage: " << show(s["failed_stage"]) << ")";
  r << "\n";
  if (s.contains("error")) r << "error: " << show(s["error"]["message"]) << "\n";
  if (s.contains("config")) {
    const auto& c = s["config"];
    r << "seed " << show(c["seed"]) << ", replicas " << show(c["replicas"]) << ", mode " << show(c["mode"]) << "\n";
  }
  r << "\n[roots]\n";
  if (s.contains("roots") && s["roots"].contains("alpha")) {
    const auto& x = s["roots"];
    r << "alpha " << show(x["alpha"]) << "  mu_alpha " << show(x["mu_alpha"]) << "  residual "
      << show(x["residual"]) << "  method " << show(x["method"]) << "\n";
  } else {
    r << "not available\n";
  }
  if (s.contains("contraction")) {
    const auto& x = s["contraction"];
    r << "beta " << show(x["beta"]) << "  rho_beta " << show(x["rho_beta"]) << "  E|Q|^beta " << show(x["q_beta"])
      << "\n";
  }
  if (s.contains("truncation")) {
    const auto& x = s["truncation"];
    r << "truncation depth " << show(x.value("depth", json())) << "  bound " << show(x["bound"]) << "\n";
  }

  const fs::path ccdf = dir / "ccdf.csv";
  r << "\n[tail diagnostic: t, P(R>t), P(R>t) t^alpha]\n";
  if (fs::exists(ccdf)) {
    const auto rows = read_csv(ccdf);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (rows[i].size() < 4) continue;
      r << std::setw(12) << std::stod(rows[i][0]) << std::setw(14) << std::stod(rows[i][1]) << std::setw(14)
        << std::stod(rows[i][3]) << "\n";
    }
  } else {
    r << "no ccdf.csv\n";
  }

  r << "\n[estimators]\n";
  bool any = false;
  if (s.contains("tails") && s["tails"].contains("hill")) {
    r << "hill alpha       " << show_estimate(s["tails"]["hill"]) << "\n";
    any = true;
  }
  if (s.contains("constants")) {
    const auto& c = s["constants"];
    if (c.contains("h_expectation")) r << "H expectation    " << show_estimate(c["h_expectation"]) << "\n";
    if (c.contains("h_integral")) {
      r << "H integral       " << show_estimate(c["h_integral"]);
      if (c["h_integral"].value("cancellation_warning", false)) r << "  [cancellation warning]";
      r << "\n";
    }
    if (c.contains("consistency")) {
      r << "difference       " << show(c["consistency"]["difference"]) << " (joint se "
        << show(c["consistency"]["joint_se"]) << ", within 3 se: " << show(c["consistency"]["within_3se"]) << ")\n";
    }
    if (c.contains("k_linear")) r << "K linear         " << show_estimate(c["k_linear"]) << "\n";
    any = true;
  }
  if (!any) r << "none\n";

  r << "\n[certificate]\n";
  if (s.contains("certificate")) {
    const auto& c = s["certificate"];
    r << "status " << show(c["status"]) << "  delta " << show(c["delta"]) << "  beta " << show(c["beta"]) << "  q "
      << show(c["q"]) << "  r " << show(c["r"]) << " (binding " << show(c["binding"]) << ")\n";
    r << "K " << show(c["k_const"]) << "  E[D^beta] " << show(c["d_beta_moment"]) << "  lower bound "
      << show(c["lower_bound"]) << "\n";
  } else if (s.value("failed_stage", "") == "certificate") {
    r << "failed: " << show(s["error"]["message"]) << "\n";
  } else {
    r << "not requested\n";
  }

  if (s.contains("symmetry")) {
    r << "\n[symmetry]\n";
    const auto& x = s["symmetry"];
    if (x.contains("levy")) r << "levy violations " << show(x["levy"].value("violations", json())) << "\n";
    if (x.contains("sandwich")) r << "sandwich violations " << show(x["sandwich"].value("violations", json())) << "\n";
  }

  const std::string text = r.str();
  write_text(dir / "report.txt", text);
  out << text;
  return kOk;
}

}  // namespace treemax::app
