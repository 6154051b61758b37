#include "treemax_app/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace treemax::app {

namespace {

class Parser {
 public:
  explicit Parser(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& msg) const {
    const int line = node.Mark().line;
    const std::string where = line >= 0 ? ":" + std::to_string(line + 1) : "";
    throw Error(ErrorCode::ConfigError, source_ + where + ": " + msg);
  }

  void require_map(const YAML::Node& node, const std::string& what) const {
    if (!node.IsMap()) fail(node, what + " must be a mapping");
  }

  void check_keys(const YAML::Node& node, const std::set<std::string>& allowed,
                  const std::string& what) const {
    require_map(node, what);
    for (const auto& kv : node) {
      const std::string key = kv.first.as<std::string>();
      if (!allowed.count(key)) fail(kv.first, "unknown key '" + key + "' in " + what);
    }
  }

  template <class T>
  T get(const YAML::Node& parent, const std::string& key, const std::string& what) const {
    const YAML::Node node = parent[key];
    if (!node) fail(parent, "missing key '" + key + "' in " + what);
    return as<T>(node, what + "." + key);
  }

  template <class T>
  T get_or(const YAML::Node& parent, const std::string& key, T fallback, const std::string& what) const {
    const YAML::Node node = parent[key];
    if (!node) return fallback;
    return as<T>(node, what + "." + key);
  }

  template <class T>
  T as(const YAML::Node& node, const std::string& what) const {
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      fail(node, "bad value for " + what);
    }
  }

  RealLaw real_law(const YAML::Node& node, const std::string& what) const {
    require_map(node, what);
    const std::string family = get<std::string>(node, "family", what);
    auto keys = [&](std::set<std::string> allowed) {
      allowed.insert("family");
      check_keys(node, allowed, what);
    };
    if (family == "constant") {
      keys({"value"});
      return law::Constant{get<double>(node, "value", what)};
    }
    if (family == "uniform") {
      keys({"lo", "hi"});
      return law::Uniform{get<double>(node, "lo", what), get<double>(node, "hi", what)};
    }
    if (family == "exponential") {
      keys({"rate"});
      return law::Exponential{get<double>(node, "rate", what)};
    }
    if (family == "two_point") {
      keys({"a", "b", "p_a"});
      return law::TwoPoint{get<double>(node, "a", what), get<double>(node, "b", what),
                           get<double>(node, "p_a", what)};
    }
    if (family == "table") {
      keys({"values", "probs"});
      return law::Table{get<std::vector<double>>(node, "values", what),
                        get<std::vector<double>>(node, "probs", what)};
    }
    if (family == "lognormal") {
      keys({"mu", "sigma"});
      return law::LogNormal{get<double>(node, "mu", what), get<double>(node, "sigma", what)};
    }
    if (family == "exp_diff_exp") {
      keys({"rate_s", "rate_t"});
      return law::ExpDiffExp{get<double>(node, "rate_s", what), get<double>(node, "rate_t", what)};
    }
    if (family == "pareto") {
      keys({"scale", "shape"});
      return law::Pareto{get<double>(node, "scale", what), get<double>(node, "shape", what)};
    }
    if (family == "normal") {
      keys({"mu", "sigma"});
      return law::Normal{get<double>(node, "mu", what), get<double>(node, "sigma", what)};
    }
    fail(node["family"], "unknown family '" + family + "' for " + what);
  }

  CountLaw count_law(const YAML::Node& node, const std::string& what) const {
    require_map(node, what);
    const std::string family = get<std::string>(node, "family", what);
    auto keys = [&](std::set<std::string> allowed) {
      allowed.insert("family");
      check_keys(node, allowed, what);
    };
    if (family == "constant") {
      keys({"value"});
      return law::CountConstant{get<std::uint32_t>(node, "value", what)};
    }
    if (family == "poisson") {
      keys({"mean"});
      return law::Poisson{get<double>(node, "mean", what)};
    }
    if (family == "two_point") {
      keys({"a", "b", "p_a"});
      return law::CountTwoPoint{get<std::uint32_t>(node, "a", what), get<std::uint32_t>(node, "b", what),
                                get<double>(node, "p_a", what)};
    }
    if (family == "table") {
      keys({"values", "probs"});
      return law::CountTable{get<std::vector<std::uint32_t>>(node, "values", what),
                             get<std::vector<double>>(node, "probs", what)};
    }
    fail(node["family"], "unknown family '" + family + "' for " + what);
  }

  GridSpec grid(const YAML::Node& node, const std::string& what) const {
    check_keys(node, {"lo", "hi", "points"}, what);
    GridSpec g;
    g.lo = get<double>(node, "lo", what);
    g.hi = get<double>(node, "hi", what);
    g.points = get_or<std::size_t>(node, "points", g.points, what);
    if (!(g.lo > 0.0) || !(g.hi >= g.lo) || g.points == 0) fail(node, what + " needs 0 < lo <= hi, points >= 1");
    return g;
  }

  ModelSpec model(const YAML::Node& node) const {
    check_keys(node, {"q", "n", "c", "joint", "dependence", "nonarithmetic_asserted"}, "model");
    ModelSpec spec;
    if (node["q"]) spec.q = real_law(node["q"], "model.q");
    bool every_atom_has_q = true;
    if (node["joint"]) {
      if (node["n"] || node["c"]) fail(node["joint"], "model.joint replaces model.n and model.c");
      const YAML::Node joint = node["joint"];
      if (!joint.IsSequence()) fail(joint, "model.joint must be a list");
      JointTable table;
      for (const auto& item : joint) {
        check_keys(item, {"prob", "weights", "q"}, "model.joint entry");
        JointAtom atom;
        atom.prob = get<double>(item, "prob", "model.joint entry");
        atom.weights = get_or<std::vector<double>>(item, "weights", {}, "model.joint entry");
        if (item["q"]) atom.q_given = real_law(item["q"], "model.joint entry q");
        every_atom_has_q = every_atom_has_q && atom.q_given.has_value();
        table.atoms.push_back(std::move(atom));
      }
      spec.joint = std::move(table);
    } else {
      if (!node["n"] || !node["c"]) fail(node, "model needs n and c (or joint)");
      spec.n = count_law(node["n"], "model.n");
      spec.c = real_law(node["c"], "model.c");
    }
    const std::string dep = get_or<std::string>(node, "dependence", "q_independent", "model");
    if (dep == "q_independent") spec.dependence = Dependence::q_independent;
    else if (dep == "q_coupled") spec.dependence = Dependence::q_coupled;
    else fail(node["dependence"], "dependence must be q_independent or q_coupled");
    // q may be omitted only when every joint atom gives its own law of Q
    if (!node["q"] && !(spec.joint && spec.dependence == Dependence::q_coupled && every_atom_has_q)) {
      fail(node, "missing key 'q' in model");
    }
    spec.nonarithmetic_asserted = get_or<bool>(node, "nonarithmetic_asserted", false, "model");
    return spec;
  }

  RunSection run(const YAML::Node& node) const {
    check_keys(node, {"seed", "replicas", "depth", "target_trunc_error", "trunc_epsilon", "parallelism",
                      "mode", "terminal", "prune_zero"},
               "run");
    RunSection r;
    if (!node["seed"]) fail(node, "run.seed is mandatory");
    r.seed = get<std::uint64_t>(node, "seed", "run");
    r.replicas = get_or<std::size_t>(node, "replicas", r.replicas, "run");
    if (r.replicas < 1) fail(node["replicas"], "run.replicas must be >= 1");
    if (node["depth"]) r.depth = get<std::uint32_t>(node, "depth", "run");
    if (node["target_trunc_error"]) {
      r.target_trunc_error = get<double>(node, "target_trunc_error", "run");
      if (!(*r.target_trunc_error > 0.0)) fail(node["target_trunc_error"], "target_trunc_error must be > 0");
    }
    if (r.depth.has_value() == r.target_trunc_error.has_value()) {
      fail(node, "run needs exactly one of depth and target_trunc_error");
    }
    r.trunc_epsilon = get_or<double>(node, "trunc_epsilon", r.trunc_epsilon, "run");
    r.parallelism = get_or<unsigned>(node, "parallelism", r.parallelism, "run");
    if (node["mode"]) {
      try {
        r.mode = functional_from_string(get<std::string>(node, "mode", "run"));
      } catch (const Error&) {
        fail(node["mode"], "mode must be max, linear, both_coupled or additive_max");
      }
    }
    if (node["terminal"]) r.terminal = real_law(node["terminal"], "run.terminal");
    r.prune_zero = get_or<bool>(node, "prune_zero", r.prune_zero, "run");
    return r;
  }

  EstimateSection estimate(const YAML::Node& node) const {
    check_keys(node, {"bracket", "tol", "n_mc", "hill_k", "estimators", "n_outer", "n_weights", "v_max",
                      "ccdf_grid", "certificate", "symmetry"},
               "estimate");
    EstimateSection e;
    if (node["bracket"]) {
      const auto b = get<std::vector<double>>(node, "bracket", "estimate");
      if (b.size() != 2 || !(b[0] > 0.0) || !(b[1] > b[0])) fail(node["bracket"], "bracket must be [lo, hi]");
      e.bracket = {b[0], b[1]};
    }
    e.tol = get_or<double>(node, "tol", e.tol, "estimate");
    e.n_mc = get_or<std::size_t>(node, "n_mc", e.n_mc, "estimate");
    if (node["hill_k"]) e.hill_k = get<std::size_t>(node, "hill_k", "estimate");
    if (node["estimators"]) {
      static const std::set<std::string> known{"hill", "ccdf", "expectation", "integral", "negative_tail",
                                               "linear_k"};
      const auto list = get<std::vector<std::string>>(node, "estimators", "estimate");
      for (const auto& name : list) {
        if (!known.count(name)) fail(node["estimators"], "unknown estimator '" + name + "'");
      }
      e.estimators = list;
    }
    e.n_outer = get_or<std::size_t>(node, "n_outer", e.n_outer, "estimate");
    e.n_weights = get_or<std::size_t>(node, "n_weights", e.n_weights, "estimate");
    if (node["v_max"]) e.v_max = get<double>(node, "v_max", "estimate");
    if (node["ccdf_grid"]) e.ccdf_grid = grid(node["ccdf_grid"], "estimate.ccdf_grid");
    e.certificate = get_or<bool>(node, "certificate", e.certificate, "estimate");
    if (node["symmetry"]) {
      const YAML::Node s = node["symmetry"];
      check_keys(s, {"depth", "replicas", "t_grid"}, "estimate.symmetry");
      SymmetrySection sym;
      sym.depth = get_or<std::uint32_t>(s, "depth", sym.depth, "estimate.symmetry");
      sym.replicas = get_or<std::size_t>(s, "replicas", sym.replicas, "estimate.symmetry");
      if (s["t_grid"]) sym.t_grid = grid(s["t_grid"], "estimate.symmetry.t_grid");
      e.symmetry = sym;
    }
    return e;
  }

  OutputSection output(const YAML::Node& node) const {
    check_keys(node, {"directory"}, "output");
    OutputSection o;
    o.directory = get_or<std::string>(node, "directory", o.directory, "output");
    return o;
  }

 private:
  std::string source_;
};

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw Error(ErrorCode::ConfigError,
                source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  const Parser p(source);
  if (!root.IsMap()) throw Error(ErrorCode::ConfigError, source + ":1: config must be a mapping");
  p.check_keys(root, {"model", "run", "estimate", "output"}, "config");
  if (!root["model"]) p.fail(root, "missing section 'model'");
  if (!root["run"]) p.fail(root, "missing section 'run'");
  ExperimentConfig cfg;
  cfg.model = p.model(root["model"]);
  cfg.run = p.run(root["run"]);
  if (root["estimate"]) cfg.estimate = p.estimate(root["estimate"]);
  if (root["output"]) cfg.output = p.output(root["output"]);
  if (cfg.run.terminal && cfg.run.mode != Functional::max) {
    p.fail(root["run"], "run.terminal requires mode max");
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, path.string() + ": cannot open");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.string());
}

}  // namespace treemax::app
