#include "eate/designs.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

namespace eate {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double binomial(Index n, Index k) {
  double r = 1.0;
  for (Index j = 1; j <= k; ++j) r = r * static_cast<double>(n - k + j) / static_cast<double>(j);
  return std::round(r);
}

void check_index(const Design& d, Index i) {
  if (i < 0 || i >= d.size()) throw IndexOutOfRange(static_cast<std::size_t>(i), d.size());
}

}  // namespace

const char* kind_name(DesignKind kind) {
  switch (kind) {
    case DesignKind::Bernoulli: return "bernoulli";
    case DesignKind::Complete: return "complete";
    case DesignKind::Paired: return "paired";
    case DesignKind::Explicit: return "explicit";
  }
  return "?";
}

Design Design::bernoulli(Index n, double p) {
  if (n <= 0) throw InvalidArgument("design needs at least one unit");
  return bernoulli(Eigen::VectorXd::Constant(n, p));
}

Design Design::bernoulli(Eigen::VectorXd p) {
  if (p.size() <= 0) throw InvalidArgument("design needs at least one unit");
  for (Index i = 0; i < p.size(); ++i)
    if (!(p[i] > 0.0 && p[i] < 1.0))
      throw InvalidArgument("bernoulli probabilities must lie in (0,1)");
  const Index n = p.size();
  return Design(n, Bernoulli{std::move(p)});
}

Design Design::complete(Index n, Index m) {
  if (n <= 0) throw InvalidArgument("design needs at least one unit");
  if (m <= 0 || m >= n) throw InvalidArgument("complete randomization needs 0 < m < n");
  return Design(n, Complete{n, m});
}

Design Design::complete_fraction(Index n, double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("treated fraction must lie in (0,1)");
  return complete(n, static_cast<Index>(std::floor(p * static_cast<double>(n))));
}

void validate_pairing(const std::vector<Index>& partner) {
  const Index n = static_cast<Index>(partner.size());
  if (n == 0 || n % 2 != 0) throw InvalidArgument("pairing needs an even, positive n");
  for (Index i = 0; i < n; ++i) {
    const Index j = partner[i];
    if (j < 0 || j >= n) throw InvalidArgument("pairing entry out of range");
    if (j == i) throw InvalidArgument("pairing has a fixed point at unit " + std::to_string(i + 1));
    if (partner[j] != i) throw InvalidArgument("pairing is not an involution");
  }
}

Design Design::paired(std::vector<Index> partner) {
  validate_pairing(partner);
  const Index n = static_cast<Index>(partner.size());
  return Design(n, Paired{std::move(partner)});
}

Design Design::explicit_support(std::vector<SupportPoint> points) {
  if (points.empty()) throw InvalidArgument("explicit design needs support points");
  const Index n = points.front().z.size();
  double total = 0.0;
  std::unordered_set<std::string> keys;
  std::vector<SupportPoint> kept;
  for (auto& pt : points) {
    if (pt.z.size() != n) throw DimensionMismatch("support points differ in length");
    if (!(pt.probability >= 0.0) || !std::isfinite(pt.probability))
      throw InvalidArgument("support probabilities must be nonnegative");
    if (!keys.insert(pt.z.key()).second) throw InvalidArgument("duplicate support point");
    total += pt.probability;
    if (pt.probability > 0.0) kept.push_back(std::move(pt));
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidArgument("support probabilities must sum to 1");
  Explicit e;
  e.support = std::move(kept);
  double acc = 0.0;
  for (const auto& pt : e.support) e.cdf.push_back(acc += pt.probability);
  return Design(n, std::move(e));
}

std::string Design::name() const { return kind_name(kind()); }

// ---------------------------------------------------------------------------

void sample_into(const Design& design, Stream& rng, AssignmentVector& z) {
  const Index n = design.size();
  if (z.size() != n) z = AssignmentVector(n);
  std::visit(overloaded{
                 [&](const Bernoulli& b) {
                   for (Index i = 0; i < n; ++i) z.set(i, rng.bernoulli(b.p[i]));
                 },
                 [&](const Complete& c) {
                   // Partial Fisher-Yates over unit labels.
                   std::vector<Index> idx(static_cast<std::size_t>(n));
                   std::iota(idx.begin(), idx.end(), Index{0});
                   for (Index i = 0; i < n; ++i) z.set(i, false);
                   for (Index k = 0; k < c.m; ++k) {
                     const Index j = k + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n - k)));
                     std::swap(idx[k], idx[j]);
                     z.set(idx[k], true);
                   }
                 },
                 [&](const Paired& p) {
                   for (Index i = 0; i < n; ++i) {
                     const Index j = p.partner[i];
                     if (i < j) {
                       const bool b = rng.bernoulli(0.5);
                       z.set(i, b);
                       z.set(j, !b);
                     }
                   }
                 },
                 [&](const Explicit& e) {
                   const double u = rng.uniform() * e.cdf.back();
                   auto it = std::upper_bound(e.cdf.begin(), e.cdf.end(), u);
                   if (it == e.cdf.end()) --it;
                   z = e.support[static_cast<std::size_t>(it - e.cdf.begin())].z;
                 }},
             design.variant());
}

AssignmentVector sample(const Design& design, Stream& rng) {
  AssignmentVector z(design.size());
  sample_into(design, rng, z);
  return z;
}

double marginal_prob(const Design& design, Index i) {
  check_index(design, i);
  return std::visit(overloaded{
                        [&](const Bernoulli& b) { return b.p[i]; },
                        [&](const Complete& c) {
                          return static_cast<double>(c.m) / static_cast<double>(c.n);
                        },
                        [&](const Paired&) { return 0.5; },
                        [&](const Explicit& e) {
                          double s = 0.0;
                          for (const auto& pt : e.support)
                            if (pt.z[i]) s += pt.probability;
                          return s;
                        }},
                    design.variant());
}

Eigen::VectorXd marginal_probs(const Design& design) {
  Eigen::VectorXd p(design.size());
  if (const auto* e = std::get_if<Explicit>(&design.variant())) {
    p.setZero();
    for (const auto& pt : e->support) p += pt.probability * pt.z.as_vector();
    return p;
  }
  for (Index i = 0; i < design.size(); ++i) p[i] = marginal_prob(design, i);
  return p;
}

double support_size(const Design& design) {
  return std::visit(overloaded{
                        [&](const Bernoulli& b) { return std::ldexp(1.0, static_cast<int>(b.p.size())); },
                        [&](const Complete& c) { return binomial(c.n, c.m); },
                        [&](const Paired& p) {
                          return std::ldexp(1.0, static_cast<int>(p.partner.size() / 2));
                        },
                        [&](const Explicit& e) { return static_cast<double>(e.support.size()); }},
                    design.variant());
}

std::vector<SupportPoint> enumerate_support(const Design& design, double limit) {
  const double size = support_size(design);
  if (size > limit) throw SupportTooLarge(size, limit);
  const Index n = design.size();
  std::vector<SupportPoint> out;
  out.reserve(static_cast<std::size_t>(size));
  std::visit(
      overloaded{
          [&](const Bernoulli& b) {
            const std::uint64_t count = std::uint64_t{1} << n;
            for (std::uint64_t mask = 0; mask < count; ++mask) {
              auto z = AssignmentVector::from_mask(n, mask);
              double pr = 1.0;
              for (Index i = 0; i < n; ++i) pr *= z[i] ? b.p[i] : 1.0 - b.p[i];
              out.push_back({std::move(z), pr});
            }
          },
          [&](const Complete& c) {
            const double pr = 1.0 / size;
            std::vector<int> sel(static_cast<std::size_t>(n), 0);
            std::fill(sel.begin(), sel.begin() + c.m, 1);
            do {
              AssignmentVector z(n);
              for (Index i = 0; i < n; ++i) z.set(i, sel[i] != 0);
              out.push_back({std::move(z), pr});
            } while (std::prev_permutation(sel.begin(), sel.end()));
          },
          [&](const Paired& p) {
            std::vector<Index> heads;
            for (Index i = 0; i < n; ++i)
              if (i < p.partner[i]) heads.push_back(i);
            const std::uint64_t count = std::uint64_t{1} << heads.size();
            const double pr = 1.0 / static_cast<double>(count);
            for (std::uint64_t mask = 0; mask < count; ++mask) {
              AssignmentVector z(n);
              for (std::size_t k = 0; k < heads.size(); ++k) {
                const bool b = (mask >> k) & 1u;
                z.set(heads[k], b);
                z.set(p.partner[heads[k]], !b);
              }
              out.push_back({std::move(z), pr});
            }
          },
          [&](const Explicit& e) { out = e.support; }},
      design.variant());
  return out;
}

std::vector<Index> adjacent_pairs(const Eigen::VectorXd& covariate) {
  const Index n = covariate.size();
  if (n == 0 || n % 2 != 0) throw InvalidArgument("pairing needs an even, positive n");
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return covariate[a] < covariate[b]; });
  std::vector<Index> partner(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; k += 2) {
    partner[order[k]] = order[k + 1];
    partner[order[k + 1]] = order[k];
  }
  return partner;
}

// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

void only_keys(const json& j, std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ParseError("unknown design key `" + it.key() + "`", 0);
  }
}

Index get_n(const json& j) {
  if (!j.contains("n") || !j["n"].is_number_integer()) throw ParseError("design needs integer `n`", 0);
  return j["n"].get<Index>();
}

}  // namespace

Design parse_design_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed design: ") + e.what(), 0);
  }
  if (!j.is_object() || !j.contains("variant") || !j["variant"].is_string())
    throw ParseError("design needs a string `variant`", 0);
  const std::string v = j["variant"].get<std::string>();
  try {
    if (v == "bernoulli") {
      only_keys(j, {"variant", "n", "p"});
      if (!j.contains("p")) throw ParseError("bernoulli design needs `p`", 0);
      if (j["p"].is_array()) {
        const auto ps = j["p"].get<std::vector<double>>();
        if (j.contains("n") && get_n(j) != static_cast<Index>(ps.size()))
          throw ParseError("`p` length differs from `n`", 0);
        return Design::bernoulli(Eigen::Map<const Eigen::VectorXd>(ps.data(), static_cast<Index>(ps.size())));
      }
      return Design::bernoulli(get_n(j), j["p"].get<double>());
    }
    if (v == "complete") {
      only_keys(j, {"variant", "n", "m", "p"});
      const Index n = get_n(j);
      if (j.contains("m") == j.contains("p"))
        throw ParseError("complete design needs exactly one of `m` or `p`", 0);
      if (j.contains("m")) return Design::complete(n, j["m"].get<Index>());
      return Design::complete_fraction(n, j["p"].get<double>());
    }
    if (v == "paired") {
      only_keys(j, {"variant", "n", "pairing"});
      if (!j.contains("pairing") || !j["pairing"].is_array())
        throw ParseError("paired design needs a `pairing` array", 0);
      auto one_based = j["pairing"].get<std::vector<Index>>();
      if (j.contains("n") && get_n(j) != static_cast<Index>(one_based.size()))
        throw ParseError("`pairing` length differs from `n`", 0);
      for (auto& x : one_based) --x;
      return Design::paired(std::move(one_based));
    }
    if (v == "explicit") {
      only_keys(j, {"variant", "n", "support"});
      if (!j.contains("support") || !j["support"].is_array())
        throw ParseError("explicit design needs a `support` array", 0);
      std::vector<SupportPoint> pts;
      for (const auto& s : j["support"]) {
        only_keys(s, {"z", "p"});
        const auto bits = s.at("z").get<std::vector<int>>();
        Bits b(static_cast<Index>(bits.size()));
        for (std::size_t k = 0; k < bits.size(); ++k) {
          if (bits[k] != 0 && bits[k] != 1) throw ParseError("support entries must be 0 or 1", 0);
          b[static_cast<Index>(k)] = static_cast<std::uint8_t>(bits[k]);
        }
        pts.push_back({AssignmentVector(std::move(b)), s.at("p").get<double>()});
      }
      auto d = Design::explicit_support(std::move(pts));
      if (j.contains("n") && get_n(j) != d.size()) throw ParseError("support length differs from `n`", 0);
      return d;
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad design field: ") + e.what(), 0);
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what(), 0);
  }
  throw ParseError("unknown design variant `" + v + "`", 0);
}

Design read_design_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_design_json(ss.str());
}

std::string design_to_json(const Design& design) {
  json j;
  j["variant"] = design.name();
  j["n"] = design.size();
  std::visit(overloaded{
                 [&](const Bernoulli& b) {
                   if ((b.p.array() == b.p[0]).all())
                     j["p"] = b.p[0];
                   else
                     j["p"] = std::vector<double>(b.p.data(), b.p.data() + b.p.size());
                 },
                 [&](const Complete& c) { j["m"] = c.m; },
                 [&](const Paired& p) {
                   std::vector<Index> one_based = p.partner;
                   for (auto& x : one_based) ++x;
                   j["pairing"] = one_based;
                 },
                 [&](const Explicit& e) {
                   j["support"] = json::array();
                   for (const auto& pt : e.support) {
                     std::vector<int> bits(static_cast<std::size_t>(pt.z.size()));
                     for (Index i = 0; i < pt.z.size(); ++i) bits[i] = pt.z[i] ? 1 : 0;
                     j["support"].push_back({{"z", bits}, {"p", pt.probability}});
                   }
                 }},
             design.variant());
  return j.dump();
}

}  // namespace eate
