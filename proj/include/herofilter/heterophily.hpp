#pragma once

#include <string>
#include <vector>

#include "herofilter/graph.hpp"
#include "herofilter/spectral.hpp"

namespace herofilter {

// Per-node heterophily h, its spectral image h_hat = U^T h, and the
// graph-level mean.
struct HeterophilyProfile {
  Vec h;
  Vec h_hat;
  double mean_h = 0.0;
};

// Outcome of a bound check. By convention lhs is the side the statement
// claims dominates, so holds <=> lhs >= rhs whenever rhs is finite.
struct BoundReport {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
  std::vector<int> excluded_indices;
  std::string notes;
};

// Fraction of each node's neighbors carrying a different label;
// zero for isolated nodes.
Vec node_heterophily(const Graph& g);

Vec spectral_heterophily(const SpectralDecomposition& dec, const Vec& h);

HeterophilyProfile heterophily_profile(const Graph& g, const SpectralDecomposition& dec);

// Average-filter-response lower bound. The weighted AM-GM core step is
// verified unconditionally; the stated bound is reported only when its
// log-denominator exceeds eps (rhs is NaN otherwise and holds falls back
// to the AM-GM outcome).
struct Prop1Result {
  BoundReport report;
  double amgm_lhs = 0.0;  // weighted arithmetic mean of |h_hat|
  double amgm_rhs = 0.0;  // weighted geometric mean of |h_hat|
  bool amgm_holds = false;
  double denominator = 0.0;
  bool rhs_reported = false;
};

Prop1Result check_prop1(const Vec& g_response, const Vec& h_hat, double eps = 1e-9);

// Explicit filter weights aligning g(lambda) with an arbitrary label
// vector (tanh activation). Returns the constructed filter and the
// achieved cosine similarity.
struct AlignResult {
  PolyFilter filter;
  double alignment = 0.0;
};

AlignResult construct_aligning_weights(const std::vector<int>& labels, const Vec& lambda,
                                       int order);

// Binary d=1 paired instance: class-0/class-1 features and label
// indicators of equal length L over an L-sized spectral frame.
struct TheoremError {
  double er = 0.0;      // summed squared error over the L pairs
  double er_bar = 0.0;  // normalized (2/n)Er with n = 2L
};

TheoremError theorem_error_oracle(const Vec& g_lap, const SpectralDecomposition& dec,
                                  const Vec& x0, const Vec& x1, const Vec& y0, const Vec& y1);

// Clamp to [-|a|, |a|].
double clamp_psi(double x, double a = 1.0);

// Generalization error bound. Fills rhs (the measured, normalized error)
// via the caller; theorem_bound itself computes lhs = the bound value.
struct TheoremBoundResult {
  BoundReport report;  // lhs = bound; rhs set by evaluate_theorem1
  double c1 = 0.0;
  double numerator = 0.0;
  double denominator = 0.0;  // log-denominator before the 2n factor
  double m_g = 0.0;          // min over I_{g,delta,eta} of eta~_i * delta_i
  bool denominator_ok = false;
};

TheoremBoundResult theorem_bound(const Vec& g_lap, const Vec& delta, const Vec& eta,
                                 const Vec& h_hat, double eps = 1e-9);

// Runs oracle and bound together on one instance.
struct Theorem1Check {
  TheoremBoundResult bound;
  TheoremError error;
};

Theorem1Check evaluate_theorem1(const Vec& g_lap, const SpectralDecomposition& dec, const Vec& x0,
                                const Vec& x1, const Vec& y0, const Vec& y1, const Vec& h_hat,
                                double eps = 1e-9);

// Pairing setup extracted from a binary-labeled graph: class-0 node l is
// paired with class-1 node l (ids ascending, truncated to equal length).
// The spectral frame is the quotient graph over pairs -- pairs l and m
// are linked when any original edge joins their four nodes -- and the
// pair heterophily is the mean of the two nodes' values.
struct TheoremInstance {
  SpectralDecomposition dec;
  Vec x0, x1, y0, y1, h_hat;
  std::vector<int> class0, class1;  // paired node ids
  bool truncated = false;           // class sizes differed
};

TheoremInstance build_theorem_instance(const Graph& g, int feature_column = 0);

}  // namespace herofilter
