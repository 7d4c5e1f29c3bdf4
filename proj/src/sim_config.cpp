#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "eate/montecarlo.hpp"
#include "text_io.hpp"

namespace eate {

double ARule::operator()(Index n) const {
  const double v = coef * std::pow(static_cast<double>(n), exponent);
  return std::clamp(v, 1.0, static_cast<double>(n));
}

namespace {

double parse_number(const std::string& s, const std::string& whole) {
  const auto caret = s.find('^');
  try {
    std::size_t used = 0;
    if (caret == std::string::npos) {
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    }
    const std::string a = s.substr(0, caret), b = s.substr(caret + 1);
    std::size_t ua = 0, ub = 0;
    const double base = std::stod(a, &ua);
    const double e = std::stod(b, &ub);
    if (ua != a.size() || ub != b.size()) throw std::invalid_argument(s);
    return std::pow(base, e);
  } catch (const std::exception&) {
    throw InvalidArgument("bad a_n rule `" + whole + "`");
  }
}

}  // namespace

ARule parse_a_rule(const std::string& text) {
  std::string t;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) t += c;
  if (t.empty()) throw InvalidArgument("empty a_n rule");
  ARule r;
  r.label = t;
  std::string coef = "1", tail;
  const auto star = t.find('*');
  if (star != std::string::npos) {
    coef = t.substr(0, star);
    tail = t.substr(star + 1);
    if (tail.empty() || tail[0] != 'n') throw InvalidArgument("bad a_n rule `" + t + "`");
  } else if (t[0] == 'n') {
    tail = t;
  } else {
    coef = t;
  }
  r.coef = parse_number(coef, t);
  if (tail.empty()) {
    r.exponent = 0.0;
  } else if (tail == "n") {
    r.exponent = 1.0;
  } else if (tail.size() > 2 && tail[1] == '^') {
    r.exponent = parse_number(tail.substr(2), t);
  } else {
    throw InvalidArgument("bad a_n rule `" + t + "`");
  }
  if (!(r.coef > 0.0) || !std::isfinite(r.coef) || !std::isfinite(r.exponent))
    throw InvalidArgument("bad a_n rule `" + t + "`");
  return r;
}

const char* design_choice_name(DesignChoice d) {
  switch (d) {
    case DesignChoice::Bernoulli: return "bernoulli";
    case DesignChoice::Complete: return "complete";
    case DesignChoice::Paired: return "paired";
  }
  return "?";
}

DesignChoice parse_design_choice(const std::string& name) {
  if (name == "bernoulli") return DesignChoice::Bernoulli;
  if (name == "complete") return DesignChoice::Complete;
  if (name == "paired") return DesignChoice::Paired;
  throw InvalidArgument("unknown design `" + name + "`");
}

Design build_design(DesignChoice choice, Index n, const Eigen::VectorXd& covariate) {
  switch (choice) {
    case DesignChoice::Bernoulli: return Design::bernoulli(n, 0.5);
    case DesignChoice::Complete: return Design::complete(n, n / 2);
    case DesignChoice::Paired: return Design::paired(adjacent_pairs(covariate));
  }
  throw InvalidArgument("unknown design");
}

Index round_even(double v) { return 2 * static_cast<Index>(std::llround(v / 2.0)); }

std::vector<Index> log_grid(double from_exp, double to_exp, int per_decade) {
  if (per_decade <= 0 || to_exp < from_exp) throw InvalidArgument("bad log grid");
  const int steps = static_cast<int>(std::llround((to_exp - from_exp) * per_decade));
  std::vector<Index> out;
  for (int x = 0; x <= steps; ++x)
    out.push_back(round_even(std::pow(10.0, from_exp + static_cast<double>(x) / per_decade)));
  return out;
}

void SimConfig::validate() const {
  if (schema != 1) throw InvalidArgument("unsupported schema version " + std::to_string(schema));
  if (a_rules.empty()) throw InvalidArgument("at least one a_n rule is required");
  if (designs.empty()) throw InvalidArgument("at least one design is required");
  if (n_grid.empty()) throw InvalidArgument("n_grid must be nonempty");
  for (Index n : n_grid)
    if (n < 2 || n % 2 != 0) throw InvalidArgument("grid sizes must be even and at least 2");
  if (reps < 1) throw InvalidArgument("reps must be at least 1");
  if (estimators.empty()) throw InvalidArgument("at least one estimator is required");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0,1)");
  if (kind == DgpKind::Adversarial && !(lambda > 0.0 && lambda <= 1.0))
    throw InvalidArgument("lambda must lie in (0,1]");
}

// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

std::size_t line_of(const std::string& text, const std::string& key) {
  const auto pos = text.find("\"" + key + "\"");
  if (pos == std::string::npos) return 0;
  return static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n')) + 1;
}

struct Reader {
  const std::string& text;

  void only(const json& j, std::initializer_list<const char*> allowed, const char* where) const {
    if (!j.is_object()) throw ParseError(std::string(where) + " must be an object", 0);
    for (auto it = j.begin(); it != j.end(); ++it) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || it.key() == a;
      if (!ok) throw ParseError("unknown key `" + it.key() + "` in " + where, line_of(text, it.key()));
    }
  }

  template <class F>
  auto field(const std::string& key, F&& f) const {
    try {
      return f();
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError("bad value for `" + key + "`: " + e.what(), line_of(text, key));
    }
  }
};

}  // namespace

SimConfig parse_sim_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    // byte offset -> line
    const auto off = std::min<std::size_t>(e.byte, text.size());
    const auto line = static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(off), '\n')) + 1;
    throw ParseError(std::string("malformed config: ") + e.what(), line);
  }
  Reader rd{text};
  rd.only(j, {"schema", "dgp", "designs", "n_grid", "reps", "seed", "estimators", "variance_kinds",
              "redraw_graph", "fixed_latents", "alpha", "eate_reference"},
          "config");
  SimConfig c;
  if (!j.contains("schema")) throw ParseError("missing `schema`", 1);
  c.schema = rd.field("schema", [&] { return j.at("schema").get<int>(); });
  if (c.schema != 1) throw ParseError("unsupported schema version", line_of(text, "schema"));

  if (!j.contains("dgp")) throw ParseError("missing `dgp`", 0);
  const json& d = j["dgp"];
  rd.only(d, {"kind", "a_rules", "weighted", "lambda"}, "dgp");
  c.kind = rd.field("kind", [&] { return parse_dgp_kind(d.at("kind").get<std::string>()); });
  if (d.contains("weighted") && rd.field("weighted", [&] { return d["weighted"].get<bool>(); })) {
    if (c.kind != DgpKind::Random && c.kind != DgpKind::RandomWeighted)
      throw ParseError("`weighted` applies to the random dgp only", line_of(text, "weighted"));
    c.kind = DgpKind::RandomWeighted;
  }
  if (d.contains("a_rules")) {
    c.a_rules.clear();
    rd.field("a_rules", [&] {
      for (const auto& r : d["a_rules"]) c.a_rules.push_back(parse_a_rule(r.get<std::string>()));
      return 0;
    });
  }
  if (d.contains("lambda")) c.lambda = rd.field("lambda", [&] { return d["lambda"].get<double>(); });

  if (j.contains("designs")) {
    c.designs.clear();
    rd.field("designs", [&] {
      for (const auto& s : j["designs"]) c.designs.push_back(parse_design_choice(s.get<std::string>()));
      return 0;
    });
  }
  if (j.contains("n_grid")) {
    const json& g = j["n_grid"];
    if (g.is_array()) {
      c.n_grid = rd.field("n_grid", [&] { return g.get<std::vector<Index>>(); });
    } else {
      rd.only(g, {"from_exp", "to_exp", "per_decade"}, "n_grid");
      c.n_grid = rd.field("n_grid", [&] {
        return log_grid(g.at("from_exp").get<double>(), g.at("to_exp").get<double>(),
                        g.at("per_decade").get<int>());
      });
    }
  }
  if (j.contains("reps")) c.reps = rd.field("reps", [&] { return j["reps"].get<long>(); });
  if (j.contains("seed")) c.seed = rd.field("seed", [&] { return j["seed"].get<std::uint64_t>(); });
  if (j.contains("estimators")) {
    c.estimators.clear();
    rd.field("estimators", [&] {
      for (const auto& s : j["estimators"]) {
        const auto name = s.get<std::string>();
        if (name == "ht")
          c.estimators.push_back(EstimatorKind::HT);
        else if (name == "hajek")
          c.estimators.push_back(EstimatorKind::Hajek);
        else
          throw InvalidArgument("unknown estimator `" + name + "`");
      }
      return 0;
    });
  }
  if (j.contains("variance_kinds")) {
    c.variance_kinds.clear();
    rd.field("variance_kinds", [&] {
      for (const auto& s : j["variance_kinds"]) c.variance_kinds.push_back(parse_inflation(s.get<std::string>()));
      return 0;
    });
  }
  if (j.contains("redraw_graph")) c.redraw_graph = rd.field("redraw_graph", [&] { return j["redraw_graph"].get<bool>(); });
  if (j.contains("fixed_latents")) c.fixed_latents = rd.field("fixed_latents", [&] { return j["fixed_latents"].get<bool>(); });
  if (j.contains("alpha")) c.alpha = rd.field("alpha", [&] { return j["alpha"].get<double>(); });
  if (j.contains("eate_reference"))
    c.eate_reference = rd.field("eate_reference", [&] { return j["eate_reference"].get<double>(); });
  try {
    c.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what(), 0);
  }
  return c;
}

SimConfig read_sim_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_sim_config(ss.str());
}

}  // namespace eate
