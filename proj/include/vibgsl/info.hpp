#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace vibgsl::info {

/// Exact joint distribution over named finite variables. The table is
/// row-major over the product alphabet, first variable most significant.
class DiscreteJoint {
 public:
  DiscreteJoint(std::vector<std::string> names, std::vector<std::size_t> sizes, std::vector<double> table);

  [[nodiscard]] const std::vector<std::string>& names() const noexcept { return names_; }
  [[nodiscard]] const std::vector<std::size_t>& sizes() const noexcept { return sizes_; }
  [[nodiscard]] const std::vector<double>& table() const noexcept { return table_; }
  [[nodiscard]] std::size_t index_of(const std::string& name) const;
  /// Marginal over `vars`, in the order given.
  [[nodiscard]] DiscreteJoint marginal(const std::vector<std::string>& vars) const;

 private:
  std::vector<std::string> names_;
  std::vector<std::size_t> sizes_;
  std::vector<double> table_;
};

/// Row-stochastic conditional table p(output | input).
struct Channel {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  std::vector<double> table;

  [[nodiscard]] double operator()(std::size_t in, std::size_t out) const { return table[in * outputs + out]; }
  /// Throws ValidationError unless every row sums to one within 1e-12.
  void validate() const;

  [[nodiscard]] static Channel identity(std::size_t n);
  /// Every input maps to the same output distribution.
  [[nodiscard]] static Channel constant(std::size_t inputs, std::vector<double> distribution);
};

/// Entropy of the marginal over `vars`, in nats; 0 log 0 := 0.
[[nodiscard]] double entropy(const DiscreteJoint& j, const std::vector<std::string>& vars);
/// I(A; B) = H(A) + H(B) - H(A, B) for disjoint A, B.
[[nodiscard]] double mutual_information(const DiscreteJoint& j, const std::vector<std::string>& a,
                                        const std::vector<std::string>& b);
/// KL(p || q) over a common alphabet; +inf if q = 0 where p > 0.
[[nodiscard]] double kl_divergence(std::span<const double> p, std::span<const double> q);

// Variable names used by build_markov_chain.
inline const std::string kLabel = "Y";
inline const std::string kNuisance = "Gn";
inline const std::string kGraph = "G";
inline const std::string kIBGraph = "G_IB";

/// p(Y, Gn, G, G_IB) = pY(y) pGn(n) p(G | y, n) p(G_IB | G). channel_graph
/// rows are indexed by y * |Gn| + n.
[[nodiscard]] DiscreteJoint build_markov_chain(std::span<const double> p_label, std::span<const double> p_nuisance,
                                               const Channel& channel_graph, const Channel& channel_ib);

inline constexpr double kBoundSlack = 1e-10;

struct NuisanceCheck {
  double lhs = 0.0;  // I(G_IB; Gn)
  double rhs = 0.0;  // I(G_IB; G) - I(G_IB; Y)
  bool holds = false;
};

/// `bound` adds H(Y) to the cross-entropy term and is valid but loose by
/// 2 H(Y) at the true posterior; `sharp_bound` subtracts it and is tight there.
struct PredictionBoundCheck {
  double exact_term = 0.0;   // -I(Y; G_IB)
  double bound = 0.0;        // -E log q(Y | G_IB) + H(Y)
  double sharp_bound = 0.0;  // -E log q(Y | G_IB) - H(Y)
  bool holds = false;        // exact_term <= both bounds (+ slack)
  bool tight = false;        // sharp_bound == exact_term within slack
};

struct CompressionBoundCheck {
  double exact_mi = 0.0;  // I(G_IB; G)
  double bound = 0.0;     // E log p(G_IB | G) / r(G_IB)
  bool holds = false;
  bool tight = false;
};

struct CombinedBoundCheck {
  double lhs = 0.0;  // -I(G_IB; Y) + beta I(G_IB; G)
  double rhs = 0.0;  // -E log q + beta E log p(G_IB | G) / r
  bool holds = false;
};

struct DataProcessingCheck {
  double through_graph = 0.0;   // I(G_IB; G)
  double from_sources = 0.0;    // I(G_IB; Y, Gn)
  bool holds = false;
};

[[nodiscard]] NuisanceCheck check_lemma1(const DiscreteJoint& j);
/// q maps G_IB (rows) to Y (columns).
[[nodiscard]] PredictionBoundCheck check_prop1_bound(const DiscreteJoint& j, const Channel& q);
/// r is a distribution over the G_IB alphabet.
[[nodiscard]] CompressionBoundCheck check_prop2_bound(const DiscreteJoint& j, std::span<const double> r);
[[nodiscard]] CombinedBoundCheck check_combined_bound(const DiscreteJoint& j, const Channel& q,
                                                      std::span<const double> r, double beta);
[[nodiscard]] DataProcessingCheck check_data_processing(const DiscreteJoint& j);

/// True p(Y | G_IB) as a channel, and the true marginal p(G_IB).
[[nodiscard]] Channel label_posterior(const DiscreteJoint& j);
[[nodiscard]] std::vector<double> ib_marginal(const DiscreteJoint& j);

/// KL between N(mu, sigma^2) and N(0, 1) after quantising both onto the same
/// `bins`-cell grid (tail mass folded into the end cells).
[[nodiscard]] double quantized_gaussian_kl(double mu, double sigma, std::size_t bins);

struct BoundStats {
  std::string name;
  std::size_t instances = 0;
  std::size_t failures = 0;
  /// Largest amount by which a left side exceeded its right side (0 if none).
  double max_violation = 0.0;
  /// Largest |bound - exact| when the variational term equals the truth
  /// (only for the tight-able bounds; negative when not applicable).
  double max_tight_gap = -1.0;
};

struct BoundSuiteReport {
  std::size_t instances = 0;
  std::size_t failures = 0;
  double max_violation = 0.0;
  std::vector<BoundStats> checks;
};

/// Randomised verification over `instances` Markov-chain joints with
/// alphabets in [2, max_alphabet] and Dirichlet(1) marginals and channels.
[[nodiscard]] BoundSuiteReport verify_bounds(std::size_t instances, std::uint64_t seed, std::size_t max_alphabet = 4);

}  // namespace vibgsl::info
