#include "insens/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>

#include "insens/balance.hpp"
#include "insens/error.hpp"
#include "json.hpp"

namespace insens {

namespace {

using json = nlohmann::ordered_json;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void fail(const YAML::Node& node, const std::string& field, const std::string& what) {
  std::ostringstream os;
  if (node.IsDefined() && node.Mark().line >= 0) os << "line " << node.Mark().line + 1 << ": ";
  os << field << ": " << what;
  throw ConfigError(os.str());
}

YAML::Node require(const YAML::Node& parent, const std::string& key, const std::string& path) {
  if (!parent.IsMap()) fail(parent, path, "expected a mapping");
  YAML::Node child = parent[key];
  if (!child.IsDefined() || child.IsNull()) fail(parent, path + "." + key, "missing required field");
  return child;
}

template <class T>
T scalar(const YAML::Node& node, const std::string& field) {
  if (!node.IsScalar()) fail(node, field, "expected a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail(node, field, "cannot convert '" + node.Scalar() + "'");
  }
}

template <class T>
T scalar_or(const YAML::Node& parent, const std::string& key, T fallback, const std::string& path) {
  YAML::Node child = parent[key];
  if (!child.IsDefined() || child.IsNull()) return fallback;
  return scalar<T>(child, path + "." + key);
}

template <class T>
std::vector<T> sequence(const YAML::Node& node, const std::string& field) {
  if (!node.IsSequence()) fail(node, field, "expected a list");
  std::vector<T> out;
  for (std::size_t k = 0; k < node.size(); ++k) {
    out.push_back(scalar<T>(node[k], field + "[" + std::to_string(k) + "]"));
  }
  return out;
}

StateVector state_from(const YAML::Node& node, const std::string& field, std::size_t num_classes) {
  auto counts = sequence<int>(node, field);
  if (counts.size() != num_classes) fail(node, field, "state must have one entry per class");
  try {
    return StateVector(std::move(counts));
  } catch (const Error& e) {
    fail(node, field, e.what());
  }
}

RateSequence rate_sequence(const YAML::Node& node, const std::string& field) {
  if (node.IsScalar()) return RateSequence::constant(scalar<double>(node, field));
  if (!node.IsMap()) fail(node, field, "expected a number or a mapping");
  RateSequence seq;
  if (node["capacity"]) {
    const double r = scalar<double>(require(node, "rate", field), field + ".rate");
    const int c = scalar<int>(node["capacity"], field + ".capacity");
    if (c < 0) fail(node, field + ".capacity", "must be nonnegative");
    seq.values.assign(static_cast<std::size_t>(c), r);
    return seq;
  }
  if (node["values"]) seq.values = sequence<double>(node["values"], field + ".values");
  seq.tail_constant = scalar_or<double>(node, "tail", 0.0, field);
  seq.tail_slope = scalar_or<double>(node, "slope", 0.0, field);
  return seq;
}

WorkloadDistribution workload(const YAML::Node& node, const std::string& field) {
  if (!node.IsMap()) fail(node, field, "expected a mapping with 'family'");
  const std::string name = scalar<std::string>(require(node, "family", field), field + ".family");
  const YAML::Node params = node["params"] ? node["params"] : YAML::Node(YAML::NodeType::Map);
  const std::string p = field + ".params";
  const double mean = scalar_or<double>(node, "mean", 1.0, field);
  FamilyParams fp;
  if (name == "exponential") {
    fp = family::Exponential{scalar_or<double>(params, "rate", 1.0, p)};
  } else if (name == "deterministic") {
    fp = family::Deterministic{scalar_or<double>(params, "value", 1.0, p)};
  } else if (name == "erlang") {
    const int k = scalar_or<int>(params, "shape", 2, p);
    fp = family::Erlang{k, scalar_or<double>(params, "rate", static_cast<double>(k), p)};
  } else if (name == "hyperexponential") {
    fp = family::HyperExponential{sequence<double>(require(params, "weights", p), p + ".weights"),
                                  sequence<double>(require(params, "rates", p), p + ".rates")};
  } else if (name == "uniform") {
    fp = family::Uniform{scalar_or<double>(params, "lo", 0.0, p), scalar_or<double>(params, "hi", 2.0, p)};
  } else if (name == "pareto") {
    const double shape = scalar_or<double>(params, "shape", 3.0, p);
    fp = family::Pareto{shape, scalar_or<double>(params, "scale", (shape - 1.0) / shape, p)};
  } else {
    fail(node, field + ".family",
         "unknown family '" + name +
             "' (expected exponential, deterministic, erlang, hyperexponential, uniform, pareto)");
  }
  try {
    return make_distribution(fp, mean);
  } catch (const ConfigError& e) {
    fail(node, field, e.what());
  }
}

std::vector<WorkloadDistribution> workloads(const YAML::Node& node, const std::string& field,
                                            std::size_t num_classes) {
  std::vector<WorkloadDistribution> out;
  if (node.IsMap()) {
    const auto w = workload(node, field);
    out.assign(num_classes, w);
    return out;
  }
  if (!node.IsSequence()) fail(node, field, "expected a list of distributions");
  for (std::size_t k = 0; k < node.size(); ++k) {
    out.push_back(workload(node[k], field + "[" + std::to_string(k) + "]"));
  }
  if (out.size() != num_classes) fail(node, field, "need one workload per class");
  return out;
}

BalanceFunction balance_function(const YAML::Node& node, const std::string& field,
                                 std::size_t num_classes) {
  if (!node.IsDefined() || node.IsNull()) return BalanceFunction::constant();
  const std::string type = scalar<std::string>(require(node, "type", field), field + ".type");
  try {
    if (type == "constant") return BalanceFunction::constant();
    if (type == "product") {
      auto lambda = sequence<double>(require(node, "lambda", field), field + ".lambda");
      if (lambda.size() != num_classes) fail(node, field + ".lambda", "need one entry per class");
      return BalanceFunction::product(std::move(lambda));
    }
    if (type == "table") {
      LatticeBox box(sequence<int>(require(node, "bounds", field), field + ".bounds"));
      std::map<StateVector, double> values;
      const YAML::Node entries = require(node, "entries", field);
      for (std::size_t k = 0; k < entries.size(); ++k) {
        const std::string f = field + ".entries[" + std::to_string(k) + "]";
        values[state_from(require(entries[k], "state", f), f + ".state", num_classes)] =
            scalar<double>(require(entries[k], "value", f), f + ".value");
      }
      return BalanceFunction::tabulated(std::move(box), std::move(values));
    }
  } catch (const DomainError& e) {
    fail(node, field, e.what());
  } catch (const ConfigError& e) {
    fail(node, field, e.what());
  }
  fail(node, field + ".type", "unknown balance function '" + type + "' (constant, product, table)");
}

RateMatrix rate_matrix(const YAML::Node& node, const std::string& field, std::size_t num_classes) {
  if (!node.IsSequence() || node.size() != num_classes + 1)
    fail(node, field, "expected an (N+1)x(N+1) matrix");
  RateMatrix m(num_classes);
  for (std::size_t i = 0; i <= num_classes; ++i) {
    auto row = sequence<double>(node[i], field + "[" + std::to_string(i) + "]");
    if (row.size() != num_classes + 1) fail(node[i], field, "row has wrong length");
    for (std::size_t j = 0; j <= num_classes; ++j) m(i, j) = row[j];
  }
  return m;
}

RateModel rate_model(const YAML::Node& node, std::size_t N) {
  const std::string f = "rates";
  const std::string model = scalar<std::string>(require(node, "model", f), f + ".model");
  if (model == "single-class") {
    return SingleClassRates{rate_sequence(require(node, "arrival", f), f + ".arrival"),
                            rate_sequence(require(node, "service", f), f + ".service")};
  }
  if (model == "whittle") {
    WhittleRates w;
    w.nu = scalar<double>(require(node, "nu", f), f + ".nu");
    const YAML::Node routing = require(node, "routing", f);
    if (!routing.IsSequence()) fail(routing, f + ".routing", "expected a matrix");
    for (std::size_t i = 0; i < routing.size(); ++i)
      w.routing.push_back(sequence<double>(routing[i], f + ".routing[" + std::to_string(i) + "]"));
    w.phi = balance_function(node["balance"], f + ".balance", N);
    return w;
  }
  if (model == "loss") {
    LossRates l;
    l.nu = sequence<double>(require(node, "nu", f), f + ".nu");
    l.sigma = sequence<double>(require(node, "sigma", f), f + ".sigma");
    const YAML::Node a = require(node, "admissible", f);
    if (a["states"]) {
      std::set<StateVector> states;
      const YAML::Node list = a["states"];
      for (std::size_t k = 0; k < list.size(); ++k)
        states.insert(state_from(list[k], f + ".admissible.states[" + std::to_string(k) + "]", N));
      l.admissible = AdmissibleSet::from_states(std::move(states));
    } else {
      const YAML::Node list = require(a, "constraints", f + ".admissible");
      std::vector<LinearConstraint> constraints;
      for (std::size_t k = 0; k < list.size(); ++k) {
        const std::string cf = f + ".admissible.constraints[" + std::to_string(k) + "]";
        if (list[k].IsScalar()) {
          try {
            constraints.push_back(parse_linear_constraint(list[k].Scalar(), N));
          } catch (const ConfigError& e) {
            fail(list[k], cf, e.what());
          }
        } else {
          LinearConstraint c{sequence<double>(require(list[k], "coeffs", cf), cf + ".coeffs"),
                             scalar<double>(require(list[k], "capacity", cf), cf + ".capacity")};
          constraints.push_back(std::move(c));
        }
      }
      l.admissible = AdmissibleSet::from_constraints(std::move(constraints));
    }
    return l;
  }
  if (model == "tabulated") {
    TabulatedRates t;
    try {
      t.box = LatticeBox(sequence<int>(require(node, "bounds", f), f + ".bounds"));
    } catch (const DomainError& e) {
      fail(node, f + ".bounds", e.what());
    }
    if (t.box.num_classes() != N) fail(node, f + ".bounds", "need one bound per class");
    const YAML::Node entries = require(node, "entries", f);
    for (std::size_t k = 0; k < entries.size(); ++k) {
      const std::string ef = f + ".entries[" + std::to_string(k) + "]";
      StateVector n = state_from(require(entries[k], "state", ef), ef + ".state", N);
      if (!t.box.contains(n)) fail(entries[k], ef + ".state", "outside the declared bounds");
      t.table[n] = rate_matrix(require(entries[k], "rates", ef), ef + ".rates", N);
    }
    return t;
  }
  fail(node, f + ".model",
       "unknown rate model '" + model + "' (single-class, whittle, loss, tabulated)");
}

SimConfig sim_config(const YAML::Node& node, SpecDocument& doc) {
  SimConfig c;
  if (!node.IsDefined() || node.IsNull()) return c;
  const std::string f = "simulation";
  if (!node.IsMap()) fail(node, f, "expected a mapping");
  c.seed = scalar_or<std::uint64_t>(node, "seed", c.seed, f);
  c.max_events = scalar_or<std::uint64_t>(node, "events", c.max_events, f);
  if (node["warmup"] && !node["warmup"].IsNull())
    c.warmup_events = scalar<std::uint64_t>(node["warmup"], f + ".warmup");
  c.snapshot_interval = scalar_or<std::uint64_t>(node, "snapshot_interval", c.snapshot_interval, f);
  c.epoch_interval = scalar_or<std::uint64_t>(node, "epoch_interval", c.epoch_interval, f);
  if (node["snapshot_spacing"] && !node["snapshot_spacing"].IsNull())
    c.snapshot_spacing = scalar<double>(node["snapshot_spacing"], f + ".snapshot_spacing");
  const std::string init = scalar_or<std::string>(node, "init", "empty", f);
  if (init != "empty" && init != "stationary") fail(node["init"], f + ".init", "expected empty or stationary");
  doc.stationary_start = init == "stationary";
  if (node["fixed_state"] && !node["fixed_state"].IsNull())
    doc.fixed_state = state_from(node["fixed_state"], f + ".fixed_state", doc.spec.num_classes);
  return c;
}

void validate_document(const YAML::Node& root, SpecDocument& doc) {
  const auto probes = probe_states(doc.spec, doc.truncation);
  const auto violations = validate_spec(doc.spec, probes);
  if (!violations.empty()) {
    std::string msg = "model invariant violated: " + violations.front().describe();
    if (violations.size() > 1) msg += " (and " + std::to_string(violations.size() - 1) + " more)";
    fail(root, "rates", msg);
  }
  if (doc.stationary_start) {
    try {
      doc.sim.init = StationaryStart{solve_analytic(doc.spec, doc.truncation)};
    } catch (const ConfigError& e) {
      fail(root, "simulation.init", std::string("stationary start needs a solvable spec: ") + e.what());
    }
  }
  if (doc.sim.max_events <= doc.sim.effective_warmup())
    fail(root["simulation"], "simulation.events", "must exceed the warmup");
}

SpecDocument spec_document(const YAML::Node& root) {
  SpecDocument doc;
  if (!root.IsMap()) fail(root, "document", "expected a mapping at the top level");
  const int n = scalar<int>(require(root, "num_classes", "document"), "num_classes");
  if (n < 1) fail(root["num_classes"], "num_classes", "must be positive");
  doc.spec.num_classes = static_cast<std::size_t>(n);
  try {
    doc.spec.discipline = parse_discipline(scalar_or<std::string>(root, "discipline", "ps", "document"));
  } catch (const ConfigError& e) {
    fail(root["discipline"], "discipline", e.what());
  }
  doc.spec.rates = rate_model(require(root, "rates", "document"), doc.spec.num_classes);
  doc.spec.workloads = workloads(require(root, "workloads", "document"), "workloads", doc.spec.num_classes);
  if (root["truncation"]) {
    doc.truncation = sequence<int>(root["truncation"], "truncation");
    for (int t : doc.truncation) {
      if (t < 0) fail(root["truncation"], "truncation", "bounds must be nonnegative");
    }
  }
  doc.sim = sim_config(root["simulation"], doc);
  return doc;
}

PlanDocument plan_document(const YAML::Node& root) {
  PlanDocument doc;
  doc.base = spec_document(root);
  validate_document(root, doc.base);
  const YAML::Node e = root["experiment"];
  const std::string f = "experiment";
  ExperimentPlan& plan = doc.plan;
  plan.spec = doc.base.spec;
  plan.sim = doc.base.sim;
  try {
    plan.analytic = solve_analytic(plan.spec, doc.base.truncation);
  } catch (const ConfigError& err) {
    fail(root, "truncation", err.what());
  }
  const YAML::Node arms = require(e, "arms", f);
  if (!arms.IsSequence() || arms.size() == 0) fail(arms, f + ".arms", "expected a nonempty list");
  for (std::size_t k = 0; k < arms.size(); ++k) {
    const std::string af = f + ".arms[" + std::to_string(k) + "]";
    Arm arm;
    arm.name = scalar_or<std::string>(arms[k], "name", "arm" + std::to_string(k), af);
    arm.workloads = workloads(require(arms[k], "workloads", af), af + ".workloads", plan.spec.num_classes);
    plan.arms.push_back(std::move(arm));
  }
  const YAML::Node t = e["thresholds"];
  plan.thresholds.tv_max = default_tv_threshold(plan.spec);
  if (t.IsDefined() && !t.IsNull()) {
    plan.thresholds.tv_max = scalar_or<double>(t, "tv_max", plan.thresholds.tv_max, f + ".thresholds");
    plan.thresholds.ks_alpha = scalar_or<double>(t, "ks_alpha", plan.thresholds.ks_alpha, f + ".thresholds");
    plan.thresholds.min_events =
        scalar_or<std::uint64_t>(t, "min_events", plan.thresholds.min_events, f + ".thresholds");
    plan.thresholds.min_cell_samples = scalar_or<std::size_t>(
        t, "min_cell_samples", plan.thresholds.min_cell_samples, f + ".thresholds");
  }
  plan.check_residuals = scalar_or<bool>(e, "check_residuals", true, f);
  return doc;
}

YAML::Node load(const std::string& text) {
  try {
    return YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError("line " + std::to_string(e.mark.line + 1) + ": malformed document: " + e.msg);
  }
}

json sequence_json(const RateSequence& s) {
  return json{{"values", s.values}, {"tail", s.tail_constant}, {"slope", s.tail_slope}};
}

json workload_json(const WorkloadDistribution& w) {
  json params = std::visit(
      overloaded{
          [](const family::Exponential& p) { return json{{"rate", p.rate}}; },
          [](const family::Deterministic& p) { return json{{"value", p.value}}; },
          [](const family::Erlang& p) { return json{{"shape", p.shape}, {"rate", p.rate}}; },
          [](const family::HyperExponential& p) {
            return json{{"weights", p.weights}, {"rates", p.rates}};
          },
          [](const family::Uniform& p) { return json{{"lo", p.lo}, {"hi", p.hi}}; },
          [](const family::Pareto& p) { return json{{"shape", p.shape}, {"scale", p.scale}}; },
      },
      w.params());
  return json{{"family", w.name()}, {"params", params}, {"mean", w.mean()}};
}

json rates_json(const NetworkSpec& spec) {
  return std::visit(
      overloaded{
          [](const SingleClassRates& s) {
            return json{{"model", "single-class"},
                        {"arrival", sequence_json(s.arrival)},
                        {"service", sequence_json(s.service)}};
          },
          [](const WhittleRates& w) {
            json balance;
            switch (w.phi.kind()) {
              case BalanceFunction::Kind::Constant:
                balance = json{{"type", "constant"}};
                break;
              case BalanceFunction::Kind::Product:
                balance = json{{"type", "product"}, {"lambda", w.phi.lambda()}};
                break;
              case BalanceFunction::Kind::Tabulated: {
                json entries = json::array();
                for (const auto& [n, v] : w.phi.table())
                  entries.push_back(json{{"state", n.counts()}, {"value", v}});
                balance = json{{"type", "table"}, {"bounds", w.phi.box()->upper()}, {"entries", entries}};
                break;
              }
              case BalanceFunction::Kind::Custom:
                balance = json{{"type", "custom"}, {"description", w.phi.description()}};
                break;
            }
            return json{{"model", "whittle"}, {"nu", w.nu}, {"routing", w.routing}, {"balance", balance}};
          },
          [](const LossRates& l) {
            json admissible;
            if (l.admissible.is_explicit()) {
              json states = json::array();
              for (const auto& n : l.admissible.states()) states.push_back(n.counts());
              admissible = json{{"states", states}};
            } else {
              json constraints = json::array();
              for (const auto& c : l.admissible.constraints())
                constraints.push_back(json{{"coeffs", c.coeffs}, {"capacity", c.capacity}});
              admissible = json{{"constraints", constraints}};
            }
            return json{{"model", "loss"}, {"nu", l.nu}, {"sigma", l.sigma}, {"admissible", admissible}};
          },
          [](const TabulatedRates& t) {
            json entries = json::array();
            for (const auto& [n, m] : t.table) {
              std::vector<std::vector<double>> rows(m.dim(), std::vector<double>(m.dim()));
              for (std::size_t i = 0; i < m.dim(); ++i)
                for (std::size_t j = 0; j < m.dim(); ++j) rows[i][j] = m(i, j);
              entries.push_back(json{{"state", n.counts()}, {"rates", rows}});
            }
            return json{{"model", "tabulated"}, {"bounds", t.box.upper()}, {"entries", entries}};
          },
      },
      spec.rates);
}

json spec_json(const SpecDocument& doc) {
  json out;
  out["num_classes"] = doc.spec.num_classes;
  out["discipline"] = to_string(doc.spec.discipline);
  out["rates"] = rates_json(doc.spec);
  json w = json::array();
  for (const auto& mu : doc.spec.workloads) w.push_back(workload_json(mu));
  out["workloads"] = w;
  out["truncation"] = doc.truncation;
  json sim;
  sim["seed"] = doc.sim.seed;
  sim["events"] = doc.sim.max_events;
  sim["warmup"] = doc.sim.effective_warmup();
  sim["snapshot_interval"] = doc.sim.snapshot_interval;
  sim["epoch_interval"] = doc.sim.epoch_interval;
  if (doc.sim.snapshot_spacing) sim["snapshot_spacing"] = *doc.sim.snapshot_spacing;
  sim["init"] = doc.stationary_start ? "stationary" : "empty";
  if (doc.fixed_state) sim["fixed_state"] = doc.fixed_state->counts();
  out["simulation"] = sim;
  return out;
}

}  // namespace

std::vector<StateVector> probe_states(const NetworkSpec& spec, const std::vector<int>& truncation) {
  std::optional<LatticeBox> box;
  try {
    if (const auto* t = std::get_if<TabulatedRates>(&spec.rates)) {
      box = t->box;
    } else if (const auto* l = std::get_if<LossRates>(&spec.rates)) {
      std::vector<int> upper = l->admissible.bounding_box(spec.num_classes).upper();
      for (int& u : upper) ++u;  // include the blocked neighbours
      box = LatticeBox(upper);
    } else if (truncation.size() == spec.num_classes) {
      box = LatticeBox(truncation);
    } else {
      box = LatticeBox(std::vector<int>(spec.num_classes, 3));
    }
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  std::vector<StateVector> out;
  const std::size_t count = std::min(box->size(), kMaxOracleStates);
  for (std::size_t s = 0; s < count; ++s) out.push_back(box->state_at(s));
  return out;
}

LinearConstraint parse_linear_constraint(const std::string& text, std::size_t num_classes) {
  static const std::regex whole(R"(^\s*(.+?)\s*<=\s*([0-9.eE+-]+)\s*$)");
  static const std::regex term(R"(^\s*([0-9.eE+-]*)\s*\*?\s*n\s*([0-9]+)\s*$)");
  std::smatch m;
  if (!std::regex_match(text, m, whole))
    throw ConfigError("constraint '" + text + "' is not of the form 'c1 n1 + c2 n2 <= C'");
  LinearConstraint c;
  c.coeffs.assign(num_classes, 0.0);
  try {
    c.capacity = std::stod(m[2].str());
  } catch (const std::exception&) {
    throw ConfigError("constraint '" + text + "' has a malformed capacity");
  }
  const std::string lhs = m[1].str();
  std::size_t start = 0;
  while (start <= lhs.size()) {
    const std::size_t plus = lhs.find('+', start);
    const std::string piece = lhs.substr(start, plus == std::string::npos ? std::string::npos : plus - start);
    std::smatch t;
    if (!std::regex_match(piece, t, term))
      throw ConfigError("constraint term '" + piece + "' is not of the form 'c nK'");
    const double coeff = t[1].str().empty() ? 1.0 : std::stod(t[1].str());
    const std::size_t k = std::stoul(t[2].str());
    if (k < 1 || k > num_classes) throw ConfigError("constraint mentions unknown class n" + t[2].str());
    c.coeffs[k - 1] += coeff;
    if (plus == std::string::npos) break;
    start = plus + 1;
  }
  return c;
}

SpecDocument parse_spec_text(const std::string& text) {
  const YAML::Node root = load(text);
  SpecDocument doc = spec_document(root);
  validate_document(root, doc);
  return doc;
}

PlanDocument parse_plan_text(const std::string& text) {
  const YAML::Node root = load(text);
  if (!root.IsMap() || !root["experiment"]) fail(root, "experiment", "missing required field");
  return plan_document(root);
}

ConfigDocument parse_config_text(const std::string& text) {
  const YAML::Node root = load(text);
  if (root.IsMap() && root["experiment"]) return plan_document(root);
  SpecDocument doc = spec_document(root);
  validate_document(root, doc);
  return doc;
}

ConfigDocument parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_config_text(buffer.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string echo_config(const SpecDocument& doc) { return spec_json(doc).dump(2); }

std::string echo_config(const PlanDocument& doc) {
  json out = spec_json(doc.base);
  json e;
  json arms = json::array();
  for (const auto& arm : doc.plan.arms) {
    json w = json::array();
    for (const auto& mu : arm.workloads) w.push_back(workload_json(mu));
    arms.push_back(json{{"name", arm.name}, {"workloads", w}});
  }
  e["arms"] = arms;
  e["thresholds"] = json{{"tv_max", doc.plan.thresholds.tv_max},
                         {"ks_alpha", doc.plan.thresholds.ks_alpha},
                         {"min_events", doc.plan.thresholds.min_events},
                         {"min_cell_samples", doc.plan.thresholds.min_cell_samples}};
  e["check_residuals"] = doc.plan.check_residuals;
  out["experiment"] = e;
  return out.dump(2);
}

}  // namespace insens
