#include "vibgsl/info.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "vibgsl/errors.hpp"

namespace vibgsl::info {

namespace {

constexpr double kSumTolerance = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

double xlogx_sum(const std::vector<double>& p) {
  double h = 0.0;
  for (double x : p)
    if (x > 0.0) h -= x * std::log(x);
  return h;
}

std::vector<double> dirichlet_one(std::size_t k, std::mt19937_64& rng) {
  std::exponential_distribution<double> gamma_one(1.0);
  std::vector<double> p(k);
  double total = 0.0;
  for (double& x : p) total += (x = gamma_one(rng) + 1e-300);
  for (double& x : p) x /= total;
  return p;
}

Channel random_channel(std::size_t inputs, std::size_t outputs, std::mt19937_64& rng) {
  Channel c{inputs, outputs, {}};
  for (std::size_t i = 0; i < inputs; ++i) {
    auto row = dirichlet_one(outputs, rng);
    c.table.insert(c.table.end(), row.begin(), row.end());
  }
  return c;
}

}  // namespace

DiscreteJoint::DiscreteJoint(std::vector<std::string> names, std::vector<std::size_t> sizes, std::vector<double> table)
    : names_(std::move(names)), sizes_(std::move(sizes)), table_(std::move(table)) {
  if (names_.size() != sizes_.size() || names_.empty()) throw ContractError("joint: names and sizes differ");
  const std::size_t cells =
      std::accumulate(sizes_.begin(), sizes_.end(), std::size_t{1}, std::multiplies<>());
  if (cells != table_.size()) throw DimensionError("joint: table size does not match alphabet sizes");
  if (std::set<std::string>(names_.begin(), names_.end()).size() != names_.size()) {
    throw ContractError("joint: duplicate variable names");
  }
  double total = 0.0;
  for (double p : table_) {
    if (!(p >= 0.0)) throw ValidationError("joint: negative probability");
    total += p;
  }
  if (std::abs(total - 1.0) > kSumTolerance) throw ValidationError("joint: probabilities do not sum to one");
}

std::size_t DiscreteJoint::index_of(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw ParameterError("unknown variable '" + name + "'");
  return static_cast<std::size_t>(it - names_.begin());
}

DiscreteJoint DiscreteJoint::marginal(const std::vector<std::string>& vars) const {
  std::vector<std::size_t> idx;
  std::vector<std::size_t> out_sizes;
  for (const auto& v : vars) {
    idx.push_back(index_of(v));
    out_sizes.push_back(sizes_[idx.back()]);
  }
  if (std::set<std::size_t>(idx.begin(), idx.end()).size() != idx.size()) {
    throw ContractError("marginal: repeated variable");
  }
  const std::size_t out_cells =
      std::accumulate(out_sizes.begin(), out_sizes.end(), std::size_t{1}, std::multiplies<>());
  std::vector<double> out(out_cells, 0.0);
  std::vector<std::size_t> digit(sizes_.size(), 0);
  for (std::size_t cell = 0; cell < table_.size(); ++cell) {
    std::size_t o = 0;
    for (std::size_t k = 0; k < idx.size(); ++k) o = o * out_sizes[k] + digit[idx[k]];
    out[o] += table_[cell];
    for (std::size_t d = sizes_.size(); d-- > 0;) {
      if (++digit[d] < sizes_[d]) break;
      digit[d] = 0;
    }
  }
  // Skip the sum check: marginals inherit normalisation from the parent.
  double total = std::accumulate(out.begin(), out.end(), 0.0);
  for (double& p : out) p /= total;
  return DiscreteJoint(vars, std::move(out_sizes), std::move(out));
}

void Channel::validate() const {
  if (inputs == 0 || outputs == 0 || table.size() != inputs * outputs) {
    throw DimensionError("channel: table does not match inputs x outputs");
  }
  for (std::size_t i = 0; i < inputs; ++i) {
    double total = 0.0;
    for (std::size_t o = 0; o < outputs; ++o) {
      const double p = (*this)(i, o);
      if (!(p >= 0.0)) throw ValidationError("channel: negative entry");
      total += p;
    }
    if (std::abs(total - 1.0) > kSumTolerance) {
      throw ValidationError("channel: row " + std::to_string(i) + " is not stochastic");
    }
  }
}

Channel Channel::identity(std::size_t n) {
  Channel c{n, n, std::vector<double>(n * n, 0.0)};
  for (std::size_t i = 0; i < n; ++i) c.table[i * n + i] = 1.0;
  return c;
}

Channel Channel::constant(std::size_t inputs, std::vector<double> distribution) {
  Channel c{inputs, distribution.size(), {}};
  for (std::size_t i = 0; i < inputs; ++i) c.table.insert(c.table.end(), distribution.begin(), distribution.end());
  return c;
}

double entropy(const DiscreteJoint& j, const std::vector<std::string>& vars) {
  return xlogx_sum(j.marginal(vars).table());
}

double mutual_information(const DiscreteJoint& j, const std::vector<std::string>& a,
                          const std::vector<std::string>& b) {
  for (const auto& v : a) {
    if (std::find(b.begin(), b.end(), v) != b.end()) {
      throw ContractError("mutual_information: variable '" + v + "' appears on both sides");
    }
  }
  std::vector<std::string> both = a;
  both.insert(both.end(), b.begin(), b.end());
  double mi = entropy(j, a) + entropy(j, b) - entropy(j, both);
  if (mi < 0.0 && mi >= -1e-14) mi = 0.0;
  return mi;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw DimensionError("kl_divergence: alphabet sizes differ");
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) return kInf;
    kl += p[i] * std::log(p[i] / q[i]);
  }
  return kl;
}

DiscreteJoint build_markov_chain(std::span<const double> p_label, std::span<const double> p_nuisance,
                                 const Channel& channel_graph, const Channel& channel_ib) {
  const std::size_t ny = p_label.size(), nn = p_nuisance.size();
  auto check_dist = [](std::span<const double> p, const char* what) {
    double total = 0.0;
    for (double x : p) {
      if (!(x >= 0.0)) throw ValidationError(std::string(what) + ": negative probability");
      total += x;
    }
    if (p.empty() || std::abs(total - 1.0) > kSumTolerance) {
      throw ValidationError(std::string(what) + " is not a distribution");
    }
  };
  check_dist(p_label, "pY");
  check_dist(p_nuisance, "pGn");
  channel_graph.validate();
  channel_ib.validate();
  if (channel_graph.inputs != ny * nn) throw DimensionError("channel (Y, Gn) -> G has the wrong input count");
  if (channel_ib.inputs != channel_graph.outputs) throw DimensionError("channel G -> G_IB has the wrong input count");
  const std::size_t ng = channel_graph.outputs, nb = channel_ib.outputs;

  std::vector<double> table(ny * nn * ng * nb);
  std::size_t cell = 0;
  for (std::size_t y = 0; y < ny; ++y)
    for (std::size_t n = 0; n < nn; ++n)
      for (std::size_t g = 0; g < ng; ++g)
        for (std::size_t b = 0; b < nb; ++b)
          table[cell++] = p_label[y] * p_nuisance[n] * channel_graph(y * nn + n, g) * channel_ib(g, b);
  return DiscreteJoint({kLabel, kNuisance, kGraph, kIBGraph}, {ny, nn, ng, nb}, std::move(table));
}

NuisanceCheck check_lemma1(const DiscreteJoint& j) {
  NuisanceCheck c;
  c.lhs = mutual_information(j, {kIBGraph}, {kNuisance});
  c.rhs = mutual_information(j, {kIBGraph}, {kGraph}) - mutual_information(j, {kIBGraph}, {kLabel});
  c.holds = c.lhs <= c.rhs + kBoundSlack;
  return c;
}

Channel label_posterior(const DiscreteJoint& j) {
  const auto pb_y = j.marginal({kIBGraph, kLabel});
  const std::size_t nb = pb_y.sizes()[0], ny = pb_y.sizes()[1];
  Channel q{nb, ny, std::vector<double>(nb * ny, 0.0)};
  for (std::size_t b = 0; b < nb; ++b) {
    double row = 0.0;
    for (std::size_t y = 0; y < ny; ++y) row += pb_y.table()[b * ny + y];
    for (std::size_t y = 0; y < ny; ++y) {
      // Unreachable G_IB symbols get a uniform row.
      q.table[b * ny + y] = row > 0.0 ? pb_y.table()[b * ny + y] / row : 1.0 / static_cast<double>(ny);
    }
  }
  return q;
}

std::vector<double> ib_marginal(const DiscreteJoint& j) { return j.marginal({kIBGraph}).table(); }

namespace {

// -sum p(y, b) log q(y | b); +inf when q vanishes on the support.
double expected_neg_log_q(const DiscreteJoint& j, const Channel& q) {
  const auto pb_y = j.marginal({kIBGraph, kLabel});
  const std::size_t nb = pb_y.sizes()[0], ny = pb_y.sizes()[1];
  if (q.inputs != nb || q.outputs != ny) throw DimensionError("q must map the G_IB alphabet to the Y alphabet");
  double total = 0.0;
  for (std::size_t b = 0; b < nb; ++b) {
    for (std::size_t y = 0; y < ny; ++y) {
      const double p = pb_y.table()[b * ny + y];
      if (p <= 0.0) continue;
      const double qv = q(b, y);
      if (qv <= 0.0) return kInf;
      total -= p * std::log(qv);
    }
  }
  return total;
}

// sum p(b, g) log p(b | g) / r(b); +inf when r vanishes on the support.
double expected_log_ratio(const DiscreteJoint& j, std::span<const double> r) {
  const auto pg_b = j.marginal({kGraph, kIBGraph});
  const std::size_t ng = pg_b.sizes()[0], nb = pg_b.sizes()[1];
  if (r.size() != nb) throw DimensionError("r must cover the G_IB alphabet");
  double total = 0.0;
  for (std::size_t g = 0; g < ng; ++g) {
    double pg = 0.0;
    for (std::size_t b = 0; b < nb; ++b) pg += pg_b.table()[g * nb + b];
    for (std::size_t b = 0; b < nb; ++b) {
      const double p = pg_b.table()[g * nb + b];
      if (p <= 0.0) continue;
      if (r[b] <= 0.0) return kInf;
      total += p * std::log((p / pg) / r[b]);
    }
  }
  return total;
}

}  // namespace

PredictionBoundCheck check_prop1_bound(const DiscreteJoint& j, const Channel& q) {
  PredictionBoundCheck c;
  c.exact_term = -mutual_information(j, {kLabel}, {kIBGraph});
  const double ce = expected_neg_log_q(j, q);
  const double h = entropy(j, {kLabel});
  c.bound = ce + h;
  c.sharp_bound = ce - h;
  c.holds = c.exact_term <= c.sharp_bound + kBoundSlack && c.exact_term <= c.bound + kBoundSlack;
  c.tight = std::abs(c.sharp_bound - c.exact_term) <= kBoundSlack;
  return c;
}

CompressionBoundCheck check_prop2_bound(const DiscreteJoint& j, std::span<const double> r) {
  CompressionBoundCheck c;
  c.exact_mi = mutual_information(j, {kIBGraph}, {kGraph});
  c.bound = expected_log_ratio(j, r);
  c.holds = c.exact_mi <= c.bound + kBoundSlack;
  c.tight = std::abs(c.bound - c.exact_mi) <= kBoundSlack;
  return c;
}

CombinedBoundCheck check_combined_bound(const DiscreteJoint& j, const Channel& q, std::span<const double> r,
                                        double beta) {
  if (!(beta >= 0.0)) throw ParameterError("beta must be non-negative");
  CombinedBoundCheck c;
  c.lhs = -mutual_information(j, {kIBGraph}, {kLabel}) + beta * mutual_information(j, {kIBGraph}, {kGraph});
  c.rhs = expected_neg_log_q(j, q) + beta * expected_log_ratio(j, r);
  c.holds = c.lhs <= c.rhs + kBoundSlack;
  return c;
}

DataProcessingCheck check_data_processing(const DiscreteJoint& j) {
  DataProcessingCheck c;
  c.through_graph = mutual_information(j, {kIBGraph}, {kGraph});
  c.from_sources = mutual_information(j, {kIBGraph}, {kLabel, kNuisance});
  c.holds = c.from_sources <= c.through_graph + kBoundSlack;
  return c;
}

double quantized_gaussian_kl(double mu, double sigma, std::size_t bins) {
  if (!(sigma > 0.0)) throw ContractError("quantized_gaussian_kl: sigma must be positive");
  if (bins < 2) throw ParameterError("quantized_gaussian_kl: need at least two bins");
  const double lo = std::min(mu - 10.0 * sigma, -10.0);
  const double hi = std::max(mu + 10.0 * sigma, 10.0);
  const double width = (hi - lo) / static_cast<double>(bins);
  constexpr double inf = std::numeric_limits<double>::infinity();
  // Mass of N(m, s^2) on [a, b), differenced on the tail side to avoid cancellation.
  auto mass = [](double a, double b, double m, double s) {
    const double za = (a - m) / (s * std::sqrt(2.0)), zb = (b - m) / (s * std::sqrt(2.0));
    if (za >= 0.0) return 0.5 * (std::erfc(za) - std::erfc(zb));
    if (zb <= 0.0) return 0.5 * (std::erfc(-zb) - std::erfc(-za));
    return 1.0 - 0.5 * (std::erfc(-za) + std::erfc(zb));
  };
  std::vector<double> p(bins), q(bins);
  for (std::size_t i = 0; i < bins; ++i) {
    const double a = i == 0 ? -inf : lo + width * static_cast<double>(i);
    const double b = i + 1 == bins ? inf : lo + width * static_cast<double>(i + 1);
    p[i] = mass(a, b, mu, sigma);
    q[i] = mass(a, b, 0.0, 1.0);
  }
  return kl_divergence(p, q);
}

BoundSuiteReport verify_bounds(std::size_t instances, std::uint64_t seed, std::size_t max_alphabet) {
  if (max_alphabet < 2 || max_alphabet > 6) throw ParameterError("max_alphabet must lie in [2, 6]");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> alphabet(2, max_alphabet);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  BoundStats lemma{"lemma1_nuisance_invariance"}, prop1{"prop1_prediction_bound"},
      prop2{"prop2_compression_bound"}, combined{"combined_bound"}, dpi{"data_processing"};
  prop1.max_tight_gap = 0.0;
  prop2.max_tight_gap = 0.0;
  auto tally = [](BoundStats& s, double lhs, double rhs, bool holds) {
    ++s.instances;
    if (!holds) ++s.failures;
    if (std::isfinite(rhs)) s.max_violation = std::max(s.max_violation, lhs - rhs);
  };

  for (std::size_t i = 0; i < instances; ++i) {
    const std::size_t ny = alphabet(rng), nn = alphabet(rng), ng = alphabet(rng), nb = alphabet(rng);
    const auto py = dirichlet_one(ny, rng);
    const auto pn = dirichlet_one(nn, rng);
    const auto to_graph = random_channel(ny * nn, ng, rng);
    const auto to_ib = random_channel(ng, nb, rng);
    const auto j = build_markov_chain(py, pn, to_graph, to_ib);

    const auto l = check_lemma1(j);
    tally(lemma, l.lhs, l.rhs, l.holds);

    const auto d = check_data_processing(j);
    tally(dpi, d.from_sources, d.through_graph, d.holds);

    const auto q = random_channel(nb, ny, rng);
    const auto p1 = check_prop1_bound(j, q);
    tally(prop1, p1.exact_term, p1.sharp_bound, p1.holds);
    const auto p1_true = check_prop1_bound(j, label_posterior(j));
    tally(prop1, p1_true.exact_term, p1_true.sharp_bound, p1_true.holds);
    prop1.instances -= 1;
    prop1.max_tight_gap = std::max(prop1.max_tight_gap, std::abs(p1_true.sharp_bound - p1_true.exact_term));

    const auto r = dirichlet_one(nb, rng);
    const auto p2 = check_prop2_bound(j, r);
    tally(prop2, p2.exact_mi, p2.bound, p2.holds);
    const auto p2_true = check_prop2_bound(j, ib_marginal(j));
    tally(prop2, p2_true.exact_mi, p2_true.bound, p2_true.holds);
    prop2.instances -= 1;
    prop2.max_tight_gap = std::max(prop2.max_tight_gap, std::abs(p2_true.bound - p2_true.exact_mi));

    const double beta = unit(rng);
    const auto c = check_combined_bound(j, q, r, beta);
    tally(combined, c.lhs, c.rhs, c.holds);
  }

  BoundSuiteReport report;
  report.instances = instances;
  report.checks = {lemma, prop1, prop2, combined, dpi};
  for (const auto& s : report.checks) {
    report.failures += s.failures;
    report.max_violation = std::max(report.max_violation, s.max_violation);
    if (s.max_tight_gap > kBoundSlack) ++report.failures;
  }
  return report;
}

}  // namespace vibgsl::info
