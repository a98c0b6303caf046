#pragma once

// Command-line front end: configure games, run experiments, verify the
// pathwise bound, sweep prefactor and tradeoff curves, and emit CSV/JSON.
// Kept in a header so the config/command logic is testable without the
// binary.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "steinolo/harness.hpp"

namespace steinolo::cli {

using nlohmann::json;

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& msg)
      : std::runtime_error(msg), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct ExperimentConfig {
  std::string command;
  std::string learner = "stein";
  std::string target = "abs";
  double alpha = 1.0;
  std::string adversary = "sign_worst";
  int T = 1000;
  uint64_t seed = 1;
  int trials = 100;
  std::string out;  // empty = stdout
  std::string format = "csv";
  std::string alpha_grid = "1";
  std::string u_grid = "-1:1:41";
  std::string eps_grid = "0.05:0.7978845608028654:40";

  bool operator==(const ExperimentConfig&) const = default;

  /// Canonical flat key=value serialization; parsing it back yields an
  /// identical config.
  std::string canonical() const {
    char alpha_buf[32];
    std::snprintf(alpha_buf, sizeof alpha_buf, "%.17g", alpha);
    std::ostringstream os;
    os << "adversary=\"" << adversary << "\"\n";
    os << "alpha=" << alpha_buf << "\n";
    os << "alpha-grid=\"" << alpha_grid << "\"\n";
    os << "command=\"" << command << "\"\n";
    os << "eps-grid=\"" << eps_grid << "\"\n";
    os << "format=\"" << format << "\"\n";
    os << "learner=\"" << learner << "\"\n";
    os << "out=\"" << out << "\"\n";
    os << "seed=" << seed << "\n";
    os << "T=" << T << "\n";
    os << "target=\"" << target << "\"\n";
    os << "trials=" << trials << "\n";
    os << "u-grid=\"" << u_grid << "\"\n";
    return os.str();
  }
};

/// Grid specifier: a comma list "a,b,c" or a linear range "start:stop:count".
inline std::vector<double> parse_grid(const std::string& spec,
                                      const std::string& field) {
  std::vector<double> out;
  try {
    if (spec.find(':') != std::string::npos) {
      const auto c1 = spec.find(':');
      const auto c2 = spec.find(':', c1 + 1);
      if (c2 == std::string::npos) throw std::invalid_argument("range");
      const double start = std::stod(spec.substr(0, c1));
      const double stop = std::stod(spec.substr(c1 + 1, c2 - c1 - 1));
      const int count = std::stoi(spec.substr(c2 + 1));
      if (count < 1) throw std::invalid_argument("count");
      if (count == 1) return {start};
      for (int i = 0; i < count; ++i)
        out.push_back(start + (stop - start) * i / (count - 1));
      return out;
    }
    std::istringstream is(spec);
    std::string item;
    while (std::getline(is, item, ',')) out.push_back(std::stod(item));
  } catch (const std::exception&) {
    throw ConfigError(field, "expected a comma list or start:stop:count, got '" +
                                 spec + "'");
  }
  if (out.empty()) throw ConfigError(field, "grid is empty");
  return out;
}

// --- adversary / learner construction --------------------------------------

inline std::pair<std::string, std::vector<double>> split_adversary_spec(
    const std::string& spec) {
  const auto colon = spec.find(':');
  std::string name = spec.substr(0, colon);
  std::vector<double> params;
  if (colon != std::string::npos) {
    std::istringstream is(spec.substr(colon + 1));
    std::string item;
    while (std::getline(is, item, ',')) {
      try {
        params.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw ConfigError("adversary", "bad numeric parameter '" + item + "'");
      }
    }
  }
  return {std::move(name), std::move(params)};
}

inline harness::Adversary make_adversary(const ExperimentConfig& cfg) {
  auto [name, p] = split_adversary_spec(cfg.adversary);
  auto want = [&](std::size_t n) {
    if (p.size() != n)
      throw ConfigError("adversary", name + " takes " + std::to_string(n) +
                                         " parameter(s)");
  };
  if (name == "sign_worst") {
    want(0);
    return harness::Adversary::sign_worst();
  }
  if (name == "rademacher") {
    want(0);
    return harness::Adversary::rademacher(cfg.seed);
  }
  if (name == "bernoulli") {
    want(1);
    return harness::Adversary::bernoulli(p[0], cfg.seed);
  }
  if (name == "drift") {
    want(1);
    return harness::Adversary::drift(p[0]);
  }
  if (name == "uniform_box") {
    want(1);
    return harness::Adversary::uniform_box(p[0], cfg.seed);
  }
  if (name == "gaussian_noisy") {
    want(2);
    return harness::Adversary::gaussian_noisy(p[0], p[1], cfg.seed);
  }
  if (name == "scripted") {
    if (p.empty()) throw ConfigError("adversary", "scripted needs g values");
    return harness::Adversary::scripted(p);
  }
  throw ConfigError("adversary", "unknown adversary '" + name + "'");
}

inline targets::Kind target_kind_from_name(const std::string& name) {
  if (name == "abs") return targets::Kind::abs;
  if (name == "huber") return targets::Kind::huber;
  if (name == "logcosh") return targets::Kind::logcosh;
  if (name == "softthr") return targets::Kind::softthr;
  throw ConfigError("target", "unknown target '" + name +
                                  "' (choose abs|huber|logcosh|softthr)");
}

inline std::unique_ptr<harness::Learner> make_learner(
    const ExperimentConfig& cfg) {
  if (cfg.learner == "stein")
    return std::make_unique<harness::SteinLearner>(
        target_kind_from_name(cfg.target), cfg.alpha);
  if (cfg.learner == "ogd")
    return std::make_unique<harness::OgdLearner>(cfg.alpha);
  if (cfg.learner == "mwu")
    return std::make_unique<harness::MwuLearner>(cfg.alpha);
  if (cfg.learner == "cover") return std::make_unique<harness::CoverLearner>();
  throw ConfigError("learner", "unknown learner '" + cfg.learner +
                                   "' (choose stein|ogd|mwu|cover)");
}

inline bool adversary_is_boolean(const std::string& spec) {
  auto [name, p] = split_adversary_spec(spec);
  if (name == "sign_worst" || name == "rademacher" || name == "bernoulli")
    return true;
  if (name == "scripted") {
    for (double g : p)
      if (std::abs(g) != 1.0) return false;
    return !p.empty();
  }
  return false;
}

inline void validate(const ExperimentConfig& cfg) {
  static const std::vector<std::string> commands = {
      "run", "verify", "prefactors", "tradeoff", "cover-check", "stochastic"};
  if (std::find(commands.begin(), commands.end(), cfg.command) ==
      commands.end())
    throw ConfigError("command", "unknown command '" + cfg.command + "'");
  if (cfg.format != "csv" && cfg.format != "json")
    throw ConfigError("format", "format must be csv or json");
  if (cfg.T < 1) throw ConfigError("T", "horizon must be >= 1");
  if (cfg.trials < 1) throw ConfigError("trials", "trials must be >= 1");
  if (!(cfg.alpha > 0.0)) throw ConfigError("alpha", "alpha must be > 0");
  if (cfg.command == "run" || cfg.command == "verify") {
    make_learner(cfg);     // validates learner/target names
    make_adversary(cfg);   // validates the adversary spec
    if (cfg.learner == "cover" && !adversary_is_boolean(cfg.adversary))
      throw ConfigError("adversary",
                        "cover learner requires a Boolean adversary "
                        "(sign_worst, rademacher, bernoulli, or scripted with "
                        "+-1 entries)");
    if (cfg.command == "verify" && cfg.learner != "stein")
      throw ConfigError("learner",
                        "verify checks the Stein learner's bound; "
                        "set learner=stein");
  }
  if (cfg.command == "cover-check" && cfg.T > 12)
    throw ConfigError("T", "cover-check enumerates 2^T paths; T must be <= 12");
  if (cfg.command == "stochastic") {
    const std::string name = split_adversary_spec(cfg.adversary).first;
    if (name != "uniform_box" && name != "gaussian_noisy")
      throw ConfigError("adversary",
                        "stochastic requires uniform_box or gaussian_noisy");
    if (cfg.learner != "stein")
      throw ConfigError("learner", "stochastic drives the Stein learner; "
                                   "set learner=stein");
    if (cfg.trials < 2) throw ConfigError("trials", "need at least 2 trials");
  }
}

// --- output helpers ---------------------------------------------------------

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_output(const ExperimentConfig& cfg, const std::string& body,
                         std::ostream& fallback) {
  if (cfg.out.empty()) {
    fallback << body;
    return;
  }
  std::ofstream f(cfg.out, std::ios::binary);  // LF line endings as written
  if (!f) throw std::runtime_error("cannot open output file '" + cfg.out + "'");
  f << body;
}

inline json config_json(const ExperimentConfig& cfg) {
  return json{{"command", cfg.command}, {"learner", cfg.learner},
              {"target", cfg.target},   {"alpha", cfg.alpha},
              {"adversary", cfg.adversary}, {"T", cfg.T},
              {"seed", cfg.seed},       {"trials", cfg.trials},
              {"format", cfg.format}};
}

/// Structural validation against the subset of JSON Schema used by the
/// checked-in schema file: type / required / properties / items.
inline void validate_against_schema(const json& value, const json& schema,
                                    const std::string& path,
                                    std::vector<std::string>& errors) {
  if (schema.contains("type")) {
    const std::string t = schema["type"];
    const bool ok = (t == "object" && value.is_object()) ||
                    (t == "array" && value.is_array()) ||
                    (t == "string" && value.is_string()) ||
                    (t == "number" && value.is_number()) ||
                    (t == "integer" && value.is_number_integer()) ||
                    (t == "boolean" && value.is_boolean());
    if (!ok) {
      errors.push_back(path + ": expected " + t);
      return;
    }
  }
  if (schema.contains("required"))
    for (const auto& key : schema["required"])
      if (!value.contains(key.get<std::string>()))
        errors.push_back(path + ": missing required key '" +
                         key.get<std::string>() + "'");
  if (schema.contains("properties") && value.is_object())
    for (const auto& [key, sub] : schema["properties"].items())
      if (value.contains(key))
        validate_against_schema(value[key], sub, path + "/" + key, errors);
  if (schema.contains("items") && value.is_array())
    for (std::size_t i = 0; i < value.size(); ++i)
      validate_against_schema(value[i], schema["items"],
                              path + "[" + std::to_string(i) + "]", errors);
}

// --- commands ---------------------------------------------------------------

inline int cmd_run(const ExperimentConfig& cfg, std::ostream& out_stream) {
  auto learner = make_learner(cfg);
  harness::Adversary adv = make_adversary(cfg);
  const harness::GameTranscript tr = harness::play(*learner, adv, cfg.T);
  const double reg_m = tr.regret_at(-1.0), reg_0 = tr.regret_at(0.0),
               reg_p = tr.regret_at(1.0);
  if (cfg.format == "csv") {
    std::ostringstream os;
    os << "t,x,g,s,loss\n";
    double s = 0.0, loss = 0.0;
    for (int t = 1; t <= cfg.T; ++t) {
      s += tr.g[t - 1];
      loss += tr.g[t - 1] * tr.x[t - 1];
      os << t << ',' << fmt(tr.x[t - 1]) << ',' << fmt(tr.g[t - 1]) << ','
         << fmt(s) << ',' << fmt(loss) << '\n';
    }
    os << "# loss_total=" << fmt(tr.loss_total) << '\n';
    os << "# reg_minus1=" << fmt(reg_m) << '\n';
    os << "# reg_zero=" << fmt(reg_0) << '\n';
    os << "# reg_plus1=" << fmt(reg_p) << '\n';
    os << "# reg_unif=" << fmt(tr.reg_unif()) << '\n';
    write_output(cfg, os.str(), out_stream);
  } else {
    json rounds = json::array();
    double s = 0.0, loss = 0.0;
    for (int t = 1; t <= cfg.T; ++t) {
      s += tr.g[t - 1];
      loss += tr.g[t - 1] * tr.x[t - 1];
      rounds.push_back(json{{"t", t},
                            {"x", tr.x[t - 1]},
                            {"g", tr.g[t - 1]},
                            {"s", s},
                            {"loss", loss}});
    }
    const json doc{{"config", config_json(cfg)},
                   {"rounds", rounds},
                   {"summary", json{{"loss_total", tr.loss_total},
                                    {"reg_minus1", reg_m},
                                    {"reg_zero", reg_0},
                                    {"reg_plus1", reg_p},
                                    {"reg_unif", tr.reg_unif()}}}};
    write_output(cfg, doc.dump(2) + "\n", out_stream);
  }
  return 0;
}

inline int cmd_verify(const ExperimentConfig& cfg, std::ostream& out_stream) {
  const double slack_tol = 1e-6;
  bool all_ok = true;
  json rows = json::array();
  std::ostringstream os;
  os << "trial,loss,bound,slack,ok\n";
  for (int i = 0; i < cfg.trials; ++i) {
    harness::SteinLearner learner(target_kind_from_name(cfg.target),
                                  cfg.alpha);
    harness::Adversary adv =
        make_adversary(cfg).with_seed(harness::mix_seed(cfg.seed, i));
    const harness::GameTranscript tr = harness::play(learner, adv, cfg.T);
    const harness::BoundLedger ledger = harness::pathwise_bound(
        tr, learner.state().schedule(), learner.state().target());
    const double slack = ledger.total() - tr.loss_total;
    const bool ok = tr.loss_total <= ledger.total() + slack_tol;
    all_ok = all_ok && ok;
    os << i << ',' << fmt(tr.loss_total) << ',' << fmt(ledger.total()) << ','
       << fmt(slack) << ',' << (ok ? 1 : 0) << '\n';
    rows.push_back(json{{"trial", i},
                        {"loss", tr.loss_total},
                        {"bound", ledger.total()},
                        {"slack", slack},
                        {"ok", ok}});
  }
  if (cfg.format == "csv") {
    os << "# all_ok=" << (all_ok ? 1 : 0) << '\n';
    write_output(cfg, os.str(), out_stream);
  } else {
    const json doc{{"config", config_json(cfg)},
                   {"trials", rows},
                   {"summary", json{{"all_ok", all_ok}}}};
    write_output(cfg, doc.dump(2) + "\n", out_stream);
  }
  return all_ok ? 0 : 3;
}

inline int cmd_prefactors(const ExperimentConfig& cfg,
                          std::ostream& out_stream) {
  const auto alphas = parse_grid(cfg.alpha_grid, "alpha-grid");
  const auto us = parse_grid(cfg.u_grid, "u-grid");
  std::ostringstream os;
  os << "u,alpha,gamma_huber,gamma_ogd,gamma_lse,gamma_mwu,gap_ogd,gap_mwu,"
        "sqrt_2_over_pi\n";
  json rows = json::array();
  for (double alpha : alphas) {
    if (!(alpha > 0.0)) throw ConfigError("alpha-grid", "alpha must be > 0");
    for (double u : us) {
      if (std::abs(u) > 1.0)
        throw ConfigError("u-grid", "comparators must lie in [-1, 1]");
      const harness::Prefactors p = harness::prefactors(u, alpha);
      os << fmt(u) << ',' << fmt(alpha) << ',' << fmt(p.gamma_huber) << ','
         << fmt(p.gamma_ogd) << ',' << fmt(p.gamma_lse) << ','
         << fmt(p.gamma_mwu) << ',' << fmt(p.gap_ogd) << ','
         << fmt(p.gap_mwu) << ',' << fmt(specfn::kSqrt2OverPi) << '\n';
      rows.push_back(json{{"u", u},
                          {"alpha", alpha},
                          {"gamma_huber", p.gamma_huber},
                          {"gamma_ogd", p.gamma_ogd},
                          {"gamma_lse", p.gamma_lse},
                          {"gamma_mwu", p.gamma_mwu},
                          {"gap_ogd", p.gap_ogd},
                          {"gap_mwu", p.gap_mwu}});
    }
  }
  if (cfg.format == "csv") {
    write_output(cfg, os.str(), out_stream);
  } else {
    const json doc{{"config", config_json(cfg)}, {"rows", rows}};
    write_output(cfg, doc.dump(2) + "\n", out_stream);
  }
  return 0;
}

inline int cmd_tradeoff(const ExperimentConfig& cfg,
                        std::ostream& out_stream) {
  const auto epses = parse_grid(cfg.eps_grid, "eps-grid");
  const double sqrt_t = std::sqrt(static_cast<double>(cfg.T));
  std::ostringstream os;
  os << "eps,gamma,alpha,residual,baseline_prefactor,gamma_bound,"
        "baseline_bound\n";
  json rows = json::array();
  for (double eps : epses) {
    harness::TradeoffPoint pt;
    try {
      pt = harness::solve_gamma_eps(eps);
    } catch (const std::domain_error& e) {
      throw ConfigError("eps-grid", e.what());
    }
    const double baseline = harness::baseline_tradeoff(eps, cfg.T);
    os << fmt(eps) << ',' << fmt(pt.gamma) << ',' << fmt(pt.alpha) << ','
       << fmt(pt.residual()) << ',' << fmt(baseline / sqrt_t) << ','
       << fmt(pt.gamma * sqrt_t) << ',' << fmt(baseline) << '\n';
    rows.push_back(json{{"eps", eps},
                        {"gamma", pt.gamma},
                        {"alpha", pt.alpha},
                        {"residual", pt.residual()},
                        {"baseline_prefactor", baseline / sqrt_t},
                        {"gamma_bound", pt.gamma * sqrt_t},
                        {"baseline_bound", baseline}});
  }
  if (cfg.format == "csv") {
    write_output(cfg, os.str(), out_stream);
  } else {
    const json doc{{"config", config_json(cfg)}, {"rows", rows}};
    write_output(cfg, doc.dump(2) + "\n", out_stream);
  }
  return 0;
}

inline int cmd_cover_check(const ExperimentConfig& cfg,
                           std::ostream& out_stream) {
  const int T = cfg.T;
  const baselines::CoverSpec spec = baselines::CoverSpec::centered_absolute(T);
  const double achievability = baselines::cover_achievability(spec);
  double worst_slack = -std::numeric_limits<double>::infinity();
  const long paths = 1L << T;
  for (long mask = 0; mask < paths; ++mask) {
    double s = 0.0, loss = 0.0;
    for (int t = 1; t <= T; ++t) {
      const double x = baselines::cover_decide(spec, t, s);
      const double g = (mask >> (t - 1)) & 1 ? 1.0 : -1.0;
      loss += g * x;
      s += g;
    }
    worst_slack = std::max(worst_slack, loss - (-spec.psi(-s)));
  }
  const bool ok = worst_slack <= 1e-9 && std::abs(achievability) <= 1e-12;
  if (cfg.format == "csv") {
    std::ostringstream os;
    os << "T,paths,worst_slack,achievability,ok\n";
    os << T << ',' << paths << ',' << fmt(worst_slack) << ','
       << fmt(achievability) << ',' << (ok ? 1 : 0) << '\n';
    write_output(cfg, os.str(), out_stream);
  } else {
    const json doc{{"config", config_json(cfg)},
                   {"summary", json{{"T", T},
                                    {"paths", paths},
                                    {"worst_slack", worst_slack},
                                    {"achievability", achievability},
                                    {"ok", ok}}}};
    write_output(cfg, doc.dump(2) + "\n", out_stream);
  }
  return ok ? 0 : 3;
}

inline int cmd_stochastic(const ExperimentConfig& cfg,
                          std::ostream& out_stream) {
  harness::SteinLearner learner(target_kind_from_name(cfg.target), cfg.alpha);
  const harness::Adversary adv = make_adversary(cfg);
  const harness::StochasticReport rep =
      harness::run_stochastic(learner, adv, cfg.T, cfg.trials, cfg.seed);
  const double margin = rep.bound_rhs + 3.0 * rep.std_error - rep.mean_loss;
  if (cfg.format == "csv") {
    std::ostringstream os;
    os << "trials,mean_loss,std_error,bound_rhs,margin,ok\n";
    os << rep.trials << ',' << fmt(rep.mean_loss) << ',' << fmt(rep.std_error)
       << ',' << fmt(rep.bound_rhs) << ',' << fmt(margin) << ','
       << (rep.holds() ? 1 : 0) << '\n';
    write_output(cfg, os.str(), out_stream);
  } else {
    const json doc{{"config", config_json(cfg)},
                   {"summary", json{{"trials", rep.trials},
                                    {"mean_loss", rep.mean_loss},
                                    {"std_error", rep.std_error},
                                    {"bound_rhs", rep.bound_rhs},
                                    {"margin", margin},
                                    {"ok", rep.holds()}}}};
    write_output(cfg, doc.dump(2) + "\n", out_stream);
  }
  return rep.holds() ? 0 : 3;
}

inline int run_command(const ExperimentConfig& cfg, std::ostream& out_stream) {
  if (cfg.command == "run") return cmd_run(cfg, out_stream);
  if (cfg.command == "verify") return cmd_verify(cfg, out_stream);
  if (cfg.command == "prefactors") return cmd_prefactors(cfg, out_stream);
  if (cfg.command == "tradeoff") return cmd_tradeoff(cfg, out_stream);
  if (cfg.command == "cover-check") return cmd_cover_check(cfg, out_stream);
  if (cfg.command == "stochastic") return cmd_stochastic(cfg, out_stream);
  throw ConfigError("command", "unknown command '" + cfg.command + "'");
}

inline void add_options(CLI::App& app, ExperimentConfig& cfg) {
  app.add_option("--command", cfg.command,
                 "run|verify|prefactors|tradeoff|cover-check|stochastic");
  app.add_option("--learner", cfg.learner, "stein|ogd|mwu|cover");
  app.add_option("--target", cfg.target, "abs|huber|logcosh|softthr");
  app.add_option("--alpha", cfg.alpha, "learning-rate scalar");
  app.add_option("--adversary", cfg.adversary,
                 "sign_worst|rademacher|bernoulli:p|drift:g|uniform_box:w|"
                 "gaussian_noisy:b,s|scripted:g1,g2,...");
  app.add_option("--T", cfg.T, "horizon");
  app.add_option("--seed", cfg.seed, "RNG seed");
  app.add_option("--trials", cfg.trials, "trial count for verify/stochastic");
  app.add_option("--out", cfg.out, "output path (default stdout)");
  app.add_option("--format", cfg.format, "csv|json");
  app.add_option("--alpha-grid", cfg.alpha_grid,
                 "comma list or start:stop:count");
  app.add_option("--u-grid", cfg.u_grid, "comma list or start:stop:count");
  app.add_option("--eps-grid", cfg.eps_grid, "comma list or start:stop:count");
  app.set_config("--config", "", "flat key=value config file");
}

/// Parse without validating or running; used by tests and the round-trip
/// contract.
inline ExperimentConfig parse_args(const std::vector<std::string>& args) {
  CLI::App app{"parse"};
  ExperimentConfig cfg;
  add_options(app, cfg);
  std::vector<const char*> argv = {"steinolo"};
  for (const auto& a : args) argv.push_back(a.c_str());
  app.parse(static_cast<int>(argv.size()), argv.data());
  return cfg;
}

inline int main_entry(int argc, const char* const* argv,
                      std::ostream& out_stream = std::cout,
                      std::ostream& err_stream = std::cerr) {
  CLI::App app{"one-dimensional fixed-time online linear optimization bench"};
  ExperimentConfig cfg;
  add_options(app, cfg);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out_stream << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err_stream << "config error: " << e.what() << "\n";
    return 1;
  }
  try {
    validate(cfg);
  } catch (const ConfigError& e) {
    err_stream << "config error: " << e.field() << ": " << e.what() << "\n";
    return 1;
  }
  try {
    return run_command(cfg, out_stream);
  } catch (const ConfigError& e) {
    err_stream << "config error: " << e.field() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err_stream << "runtime error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace steinolo::cli
