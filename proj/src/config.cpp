#include "inesc/config.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace inesc {

using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

void reject_unknown(const json& obj, const std::string& where,
                    std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) {
    throw ConfigError((where.empty() ? "config" : where) + " must be an object");
  }
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& item : obj.items()) {
    if (!keys.count(item.key())) {
      throw ConfigError("unknown key '" +
                        (where.empty() ? item.key() : where + "." + item.key()) +
                        "'");
    }
  }
}

const json& require(const json& obj, const std::string& where, const char* key) {
  if (!obj.contains(key)) {
    throw ConfigError("missing required key '" + where + "." + key + "'");
  }
  return obj.at(key);
}

double as_number(const json& v, const std::string& field) {
  if (!v.is_number()) throw ConfigError(field + " must be a number");
  return v.get<double>();
}

double number_or(const json& obj, const std::string& where, const char* key,
                 double fallback) {
  return obj.contains(key) ? as_number(obj.at(key), where + "." + key) : fallback;
}

double positive(const json& obj, const std::string& where, const char* key) {
  const std::string field = where + "." + key;
  const double v = as_number(require(obj, where, key), field);
  if (!(v > 0)) throw ConfigError(field + " must be positive (got " + num(v) + ")");
  return v;
}

// Array of numbers of the given length; a bare number broadcasts when
// `broadcast` is set.
Vector vector_field(const json& v, const std::string& field, Eigen::Index len,
                    bool broadcast) {
  if (v.is_number() && broadcast) {
    return Vector::Constant(len, v.get<double>());
  }
  if (!v.is_array()) {
    throw ConfigError(field + " must be an array" +
                      (broadcast ? " or a number" : ""));
  }
  if (static_cast<Eigen::Index>(v.size()) != len) {
    throw ConfigError(field + " must have " + std::to_string(len) +
                      " entries (got " + std::to_string(v.size()) + ")");
  }
  Vector out(len);
  for (Eigen::Index k = 0; k < len; ++k) {
    out[k] = as_number(v.at(static_cast<std::size_t>(k)),
                       field + "[" + std::to_string(k) + "]");
  }
  return out;
}

Matrix row_major(const json& v, const std::string& field, Eigen::Index rows,
                 Eigen::Index cols) {
  const Vector flat = vector_field(v, field, rows * cols, false);
  Matrix M(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) M(r, c) = flat[r * cols + c];
  }
  return M;
}

Eigen::Index dim_field(const json& obj, const std::string& where, const char* key) {
  if (!obj.contains(key)) return 1;
  const json& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 1) {
    throw ConfigError(where + "." + key + " must be a positive integer");
  }
  return static_cast<Eigen::Index>(v.get<long long>());
}

GameModel parse_game(const json& doc) {
  const std::string where = "game";
  reject_unknown(doc, where, {"agents"});
  const json& agents = require(doc, where, "agents");
  if (!agents.is_array() || agents.empty()) {
    throw ConfigError("game.agents must be a non-empty array");
  }
  std::vector<Matrix> Bs;
  Eigen::Index n = 0;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const std::string at = where + ".agents." + std::to_string(i);
    const json& a = agents[i];
    reject_unknown(a, at, {"n", "m", "B", "cost"});
    const Eigen::Index ni = dim_field(a, at, "n");
    const Eigen::Index mi = dim_field(a, at, "m");
    if (a.contains("B")) {
      Bs.push_back(row_major(a.at("B"), at + ".B", ni, mi));
    } else if (ni == mi) {
      Bs.push_back(Matrix::Identity(ni, mi));
    } else {
      throw ConfigError("missing required key '" + at + ".B' (n != m)");
    }
    n += ni;
  }
  std::vector<Cost> costs;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const std::string at = where + ".agents." + std::to_string(i) + ".cost";
    const json& c = require(agents[i], where + ".agents." + std::to_string(i), "cost");
    reject_unknown(c, at, {"Q", "q", "r"});
    QuadraticCost qc;
    qc.Q = row_major(require(c, at, "Q"), at + ".Q", n, n);
    qc.q = c.contains("q") ? vector_field(c.at("q"), at + ".q", n, false)
                           : Vector::Zero(n);
    qc.r = number_or(c, at, "r", 0.0);
    costs.emplace_back(std::move(qc));
  }
  return GameModel(std::move(Bs), std::move(costs));
}

DitherSpec parse_dither(const json& d, const std::string& at, Eigen::Index mi) {
  reject_unknown(d, at, {"amplitude", "frequency", "phase"});
  DitherSpec spec;
  spec.amplitude = vector_field(require(d, at, "amplitude"), at + ".amplitude", mi, true);
  spec.frequency = d.contains("frequency")
                       ? vector_field(d.at("frequency"), at + ".frequency", mi, true)
                       : Vector::Zero(mi);
  spec.phase = d.contains("phase")
                   ? vector_field(d.at("phase"), at + ".phase", mi, true)
                   : Vector::Zero(mi);
  for (Eigen::Index k = 0; k < mi; ++k) {
    if (!(spec.amplitude[k] >= 0)) {
      throw ConfigError(at + ".amplitude must be non-negative");
    }
    if (spec.amplitude[k] > 0 && !(spec.frequency[k] > 0)) {
      throw ConfigError(at + ".frequency must be positive when amplitude > 0");
    }
  }
  return spec;
}

void parse_controller(const json& doc, ExperimentConfig& cfg) {
  const std::string where = "controller";
  reject_unknown(doc, where, {"type", "agents"});
  const json& type = require(doc, where, "type");
  if (!type.is_string()) throw ConfigError("controller.type must be a string");
  cfg.controller = controller_kind_from_string(type.get<std::string>());
  const json& agents = require(doc, where, "agents");
  const std::size_t N = cfg.game.num_agents();
  if (!agents.is_array() || agents.size() != N) {
    throw ConfigError("controller.agents must list one entry per game agent (" +
                      std::to_string(N) + ")");
  }
  cfg.tau = Vector(static_cast<Eigen::Index>(N));
  for (std::size_t i = 0; i < N; ++i) {
    const std::string at = where + ".agents." + std::to_string(i);
    const json& a = agents[i];
    const Eigen::Index mi = cfg.game.input_dim(i);
    switch (cfg.controller) {
      case ControllerKind::FullInfo:
        reject_unknown(a, at, {"tau"});
        cfg.tau[static_cast<Eigen::Index>(i)] = positive(a, at, "tau");
        break;
      case ControllerKind::Inesc: {
        reject_unknown(a, at, {"tau", "K", "k_T", "sigma", "alpha1",
                               "theta_box", "dither"});
        InescAgentParams p;
        p.tau = positive(a, at, "tau");
        cfg.tau[static_cast<Eigen::Index>(i)] = p.tau;
        p.estimator.K = positive(a, at, "K");
        p.estimator.k_T = positive(a, at, "k_T");
        p.estimator.sigma = positive(a, at, "sigma");
        p.estimator.alpha1 = positive(a, at, "alpha1");
        p.estimator.box = ThetaBox::uniform(mi + 1);
        if (a.contains("theta_box")) {
          const std::string bt = at + ".theta_box";
          const json& b = a.at("theta_box");
          reject_unknown(b, bt, {"lower", "upper"});
          if (b.contains("lower")) {
            p.estimator.box.lower = vector_field(b.at("lower"), bt + ".lower", mi + 1, true);
          }
          if (b.contains("upper")) {
            p.estimator.box.upper = vector_field(b.at("upper"), bt + ".upper", mi + 1, true);
          }
          if ((p.estimator.box.lower.array() > 0).any() ||
              (p.estimator.box.upper.array() < 0).any()) {
            throw ConfigError(bt + " must contain the zero initial estimate");
          }
        }
        p.dither = a.contains("dither") ? parse_dither(a.at("dither"), at + ".dither", mi)
                                        : DitherSpec::none(mi);
        cfg.inesc.push_back(std::move(p));
        break;
      }
      case ControllerKind::Baseline: {
        reject_unknown(a, at, {"omega_h", "omega_l", "omega", "k", "A"});
        BaselineAgentParams p;
        p.omega_h = positive(a, at, "omega_h");
        p.omega_l = positive(a, at, "omega_l");
        p.omega = positive(a, at, "omega");
        p.k = positive(a, at, "k");
        p.A = positive(a, at, "A");
        cfg.baseline.push_back(p);
        break;
      }
    }
  }
  // The baseline has no integral time constants.
  if (cfg.controller == ControllerKind::Baseline) cfg.tau = Vector();
}

void parse_sim(const json& doc, ExperimentConfig& cfg) {
  const std::string where = "sim";
  reject_unknown(doc, where, {"step", "horizon", "stride", "allow_large_step", "initial"});
  cfg.sim.step = number_or(doc, where, "step", cfg.sim.step);
  cfg.sim.horizon = number_or(doc, where, "horizon", cfg.sim.horizon);
  if (doc.contains("stride")) {
    const json& s = doc.at("stride");
    if (!s.is_number_integer()) throw ConfigError("sim.stride must be an integer");
    cfg.sim.stride = s.get<int>();
  }
  if (doc.contains("allow_large_step")) {
    if (!doc.at("allow_large_step").is_boolean()) {
      throw ConfigError("sim.allow_large_step must be a boolean");
    }
    cfg.sim.allow_large_step = doc.at("allow_large_step").get<bool>();
  }
  cfg.x0 = Vector::Zero(cfg.game.state_dim());
  cfg.u0 = Vector::Zero(cfg.game.input_dim());
  if (doc.contains("initial")) {
    const json& init = doc.at("initial");
    reject_unknown(init, "sim.initial", {"x", "u"});
    if (init.contains("x")) {
      cfg.x0 = vector_field(init.at("x"), "sim.initial.x", cfg.game.state_dim(), true);
    }
    if (init.contains("u")) {
      cfg.u0 = vector_field(init.at("u"), "sim.initial.u", cfg.game.input_dim(), true);
    }
  }
}

ExperimentConfig from_document(const json& doc) {
  reject_unknown(doc, "", {"name", "game", "controller", "sim", "output"});
  std::string name = "experiment";
  if (doc.contains("name")) {
    if (!doc.at("name").is_string()) throw ConfigError("name must be a string");
    name = doc.at("name").get<std::string>();
  }
  ExperimentConfig cfg{.name = name, .game = parse_game(require(doc, "", "game"))};
  parse_controller(require(doc, "", "controller"), cfg);
  parse_sim(doc.contains("sim") ? doc.at("sim") : json::object(), cfg);
  if (doc.contains("output")) {
    const json& out = doc.at("output");
    reject_unknown(out, "output", {"dir"});
    if (out.contains("dir")) {
      if (!out.at("dir").is_string()) throw ConfigError("output.dir must be a string");
      cfg.output_dir = out.at("dir").get<std::string>();
    }
  }
  cfg.validate();
  cfg.hash = config_hash(cfg);
  return cfg;
}

json vec_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(v[k]);
  return a;
}

json row_major_json(const Matrix& M) {
  json a = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    for (Eigen::Index c = 0; c < M.cols(); ++c) a.push_back(M(r, c));
  }
  return a;
}

std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t k = 0; k + 1 < byte && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' must look like key.path=value");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  std::vector<std::string> parts;
  std::stringstream ss(path);
  for (std::string p; std::getline(ss, p, '.');) {
    if (p.empty()) throw ConfigError("override path '" + path + "' has an empty segment");
    parts.push_back(p);
  }

  // Depth-first walk so that "*" fans out over array elements.
  std::function<void(json&, std::size_t)> assign = [&](json& node, std::size_t depth) {
    const std::string& seg = parts[depth];
    const bool last = depth + 1 == parts.size();
    if (node.is_array()) {
      std::vector<std::size_t> targets;
      if (seg == "*") {
        for (std::size_t k = 0; k < node.size(); ++k) targets.push_back(k);
      } else {
        std::size_t idx = 0;
        try {
          std::size_t used = 0;
          idx = std::stoul(seg, &used);
          if (used != seg.size()) throw std::invalid_argument(seg);
        } catch (const std::exception&) {
          throw ConfigError("override path '" + path + "': '" + seg +
                            "' is not an array index");
        }
        if (idx >= node.size()) {
          throw ConfigError("override path '" + path + "': index " + seg +
                            " out of range");
        }
        targets.push_back(idx);
      }
      for (std::size_t k : targets) {
        if (last) {
          node[k] = value;
        } else {
          assign(node[k], depth + 1);
        }
      }
      return;
    }
    if (!node.is_object()) {
      throw ConfigError("override path '" + path + "' descends into a scalar");
    }
    if (last) {
      node[seg] = value;
    } else {
      if (!node.contains(seg)) node[seg] = json::object();
      assign(node[seg], depth + 1);
    }
  };
  assign(doc, 0);
}

namespace {

json read_document(const std::string& text,
                   const std::vector<std::string>& overrides) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte);
    throw ConfigError("parse error at line " + std::to_string(line) +
                      ", column " + std::to_string(col) + ": " + e.what());
  }
  for (const auto& o : overrides) apply_override(doc, o);
  return doc;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text,
                                   const std::vector<std::string>& overrides) {
  return from_document(read_document(text, overrides));
}

ExperimentConfig parse_config(const std::filesystem::path& path,
                              const std::vector<std::string>& overrides) {
  const std::string text = read_file(path);
  try {
    return parse_config_text(text, overrides);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

GameModel parse_game_config(const std::filesystem::path& path,
                            const std::vector<std::string>& overrides) {
  const std::string text = read_file(path);
  try {
    const json doc = read_document(text, overrides);
    reject_unknown(doc, "", {"name", "game", "controller", "sim", "output"});
    return parse_game(require(doc, "", "game"));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

json to_json(const ExperimentConfig& cfg) {
  const GameModel& game = cfg.game;
  json agents = json::array();
  for (AgentIndex i = 0; i < game.num_agents(); ++i) {
    json a{{"n", game.state_dim(i)}, {"m", game.input_dim(i)},
           {"B", row_major_json(game.B(i))}};
    if (const auto* qc = game.cost(i).quadratic()) {
      a["cost"] = {{"Q", row_major_json(qc->Q)}, {"q", vec_json(qc->q)}, {"r", qc->r}};
    } else {
      a["cost"] = "callback";
    }
    agents.push_back(std::move(a));
  }
  json ctrl_agents = json::array();
  for (AgentIndex i = 0; i < game.num_agents(); ++i) {
    switch (cfg.controller) {
      case ControllerKind::FullInfo:
        ctrl_agents.push_back({{"tau", cfg.tau[static_cast<Eigen::Index>(i)]}});
        break;
      case ControllerKind::Inesc: {
        const auto& p = cfg.inesc.at(i);
        ctrl_agents.push_back(
            {{"tau", p.tau},
             {"K", p.estimator.K},
             {"k_T", p.estimator.k_T},
             {"sigma", p.estimator.sigma},
             {"alpha1", p.estimator.alpha1},
             {"theta_box",
              {{"lower", vec_json(p.estimator.box.lower)},
               {"upper", vec_json(p.estimator.box.upper)}}},
             {"dither",
              {{"amplitude", vec_json(p.dither.amplitude)},
               {"frequency", vec_json(p.dither.frequency)},
               {"phase", vec_json(p.dither.phase)}}}});
        break;
      }
      case ControllerKind::Baseline: {
        const auto& p = cfg.baseline.at(i);
        ctrl_agents.push_back({{"omega_h", p.omega_h},
                               {"omega_l", p.omega_l},
                               {"omega", p.omega},
                               {"k", p.k},
                               {"A", p.A}});
        break;
      }
    }
  }
  return json{
      {"name", cfg.name},
      {"game", {{"agents", std::move(agents)}}},
      {"controller", {{"type", to_string(cfg.controller)}, {"agents", std::move(ctrl_agents)}}},
      {"sim",
       {{"step", cfg.sim.step},
        {"horizon", cfg.sim.horizon},
        {"stride", cfg.sim.stride},
        {"allow_large_step", cfg.sim.allow_large_step},
        {"initial", {{"x", vec_json(cfg.x0)}, {"u", vec_json(cfg.u0)}}}}},
      {"output", {{"dir", cfg.output_dir}}}};
}

std::string config_hash(const ExperimentConfig& config) {
  json canonical = to_json(config);
  // Output location does not change the experiment.
  canonical.erase("output");
  const std::string text = canonical.dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace inesc
