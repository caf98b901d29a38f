#include "herofilter/heterophily.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "herofilter/errors.hpp"

namespace herofilter {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Validates g in [0,1], forgiving rounding-level overshoot (a top
// eigenvalue of 1 + 4e-16 puts the low-pass response a hair above 1).
Vec sanitize_unit_interval(const Vec& g, const char* what) {
  constexpr double slack = 1e-9;
  Vec out = g;
  for (double& v : out) {
    if (!(v >= -slack && v <= 1.0 + slack))
      throw PreconditionError(std::string(what) + ": filter response must lie in [0,1]");
    v = std::min(1.0, std::max(0.0, v));
  }
  return out;
}

double cosine(const Vec& a, const Vec& b) {
  const double na = norm2(a);
  const double nb = norm2(b);
  if (na == 0.0 || nb == 0.0) throw DegenerateError("cosine undefined for zero vector");
  return std::min(1.0, std::max(-1.0, dot(a, b) / (na * nb)));
}

}  // namespace

Vec node_heterophily(const Graph& g) {
  Vec h(g.num_nodes, 0.0);
  std::vector<int> deg(g.num_nodes, 0);
  std::vector<int> cross(g.num_nodes, 0);
  for (auto [u, v] : g.edges) {
    ++deg[u];
    ++deg[v];
    if (g.labels[u] != g.labels[v]) {
      ++cross[u];
      ++cross[v];
    }
  }
  for (int i = 0; i < g.num_nodes; ++i)
    h[i] = deg[i] > 0 ? static_cast<double>(cross[i]) / deg[i] : 0.0;
  return h;
}

Vec spectral_heterophily(const SpectralDecomposition& dec, const Vec& h) {
  if (h.size() != dec.size()) throw ShapeError("spectral_heterophily: dimension mismatch");
  return graph_fourier(dec.eigenvectors, h);
}

HeterophilyProfile heterophily_profile(const Graph& g, const SpectralDecomposition& dec) {
  HeterophilyProfile prof;
  prof.h = node_heterophily(g);
  prof.h_hat = spectral_heterophily(dec, prof.h);
  double sum = 0.0;
  for (double v : prof.h) sum += v;
  prof.mean_h = prof.h.empty() ? 0.0 : sum / static_cast<double>(prof.h.size());
  return prof;
}

Prop1Result check_prop1(const Vec& g_raw, const Vec& h_hat, double eps) {
  if (g_raw.size() != h_hat.size()) throw ShapeError("check_prop1: dimension mismatch");
  const Vec g_response = sanitize_unit_interval(g_raw, "check_prop1");
  const std::size_t n = g_response.size();
  if (n == 0) throw DegenerateError("check_prop1: empty spectrum");

  Prop1Result res;
  std::vector<std::size_t> included;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::fabs(h_hat[i]) < eps)
      res.report.excluded_indices.push_back(static_cast<int>(i));
    else
      included.push_back(i);
  }
  if (included.empty()) throw DegenerateError("check_prop1: every |h_hat_i| below eps");

  double sum_g = 0.0;
  for (std::size_t i : included) sum_g += g_response[i];
  if (sum_g == 0.0) throw DegenerateError("check_prop1: filter response sums to zero");

  double am = 0.0;
  double log_gm = 0.0;
  double sum_log = 0.0;
  for (std::size_t i : included) {
    const double mag = std::fabs(h_hat[i]);
    const double weight = g_response[i] / sum_g;
    am += weight * mag;
    log_gm += weight * std::log(mag);
    sum_log += std::log(mag);
  }
  res.amgm_lhs = am;
  res.amgm_rhs = std::exp(log_gm);
  res.amgm_holds = (res.amgm_rhs - res.amgm_lhs) <= 1e-12;

  double total_g = 0.0;
  for (double v : g_response) total_g += v;
  res.report.lhs = total_g / static_cast<double>(n);

  // log(sum g|h|) - log(sum g) collapses to log of the weighted mean.
  res.denominator = std::log(am);
  res.rhs_reported = res.denominator > eps;
  if (res.rhs_reported) {
    res.report.rhs = sum_log / (static_cast<double>(n) * res.denominator);
    res.report.holds = res.report.lhs >= res.report.rhs;
  } else {
    res.report.rhs = kNan;
    res.report.holds = res.amgm_holds;
  }

  std::ostringstream notes;
  notes << "amgm lhs=" << res.amgm_lhs << " rhs=" << res.amgm_rhs
        << (res.amgm_holds ? " (holds)" : " (VIOLATED)") << "; log-denominator="
        << res.denominator << (res.rhs_reported ? "" : " below eps, stated bound not reported")
        << "; excluded=" << res.report.excluded_indices.size();
  res.report.notes = notes.str();
  return res;
}

AlignResult construct_aligning_weights(const std::vector<int>& labels, const Vec& lambda,
                                       int order) {
  if (labels.size() != lambda.size())
    throw ShapeError("construct_aligning_weights: dimension mismatch");
  if (order < 1) throw ParamError("construct_aligning_weights: order must be >= 1");
  for (double l : lambda)
    if (l == 0.0) throw SingularSpectrumError("construct_aligning_weights: zero eigenvalue");

  int max_label = 0;
  for (int y : labels) {
    if (y < 0) throw ParamError("construct_aligning_weights: negative label");
    max_label = std::max(max_label, y);
  }
  if (max_label == 0) throw DegenerateError("construct_aligning_weights: all-zero labels");

  const std::size_t n = lambda.size();
  const int num_classes = max_label + 1;
  // Scale so c*y_i/K = y_i / (2(C-1)) stays in [0, 1/2], inside tanh's range.
  const double scale = static_cast<double>(order) / (2.0 * (num_classes - 1));

  PolyFilter f = make_poly_filter(order, n, Activation::tanh);
  for (std::size_t i = 0; i < n; ++i) {
    const double target = scale * labels[i] / order;  // = y_i / (2(C-1))
    const double arg = std::atanh(target);
    double pwr = 1.0;
    for (int k = 0; k < order; ++k) {
      pwr *= lambda[i];
      if (pwr == 0.0)
        throw SingularSpectrumError("construct_aligning_weights: eigenvalue power underflow");
      const double w = arg / pwr;
      if (!std::isfinite(w))
        throw SingularSpectrumError("construct_aligning_weights: non-finite weight");
      f.weights[k][i] = w;
    }
  }

  Vec response = filter_response(f, lambda);
  Vec y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<double>(labels[i]);
  return AlignResult{std::move(f), cosine(response, y)};
}

TheoremError theorem_error_oracle(const Vec& g_lap, const SpectralDecomposition& dec,
                                  const Vec& x0, const Vec& x1, const Vec& y0, const Vec& y1) {
  const std::size_t pairs = dec.size();
  if (x0.size() != pairs || x1.size() != pairs || y0.size() != pairs || y1.size() != pairs ||
      g_lap.size() != pairs)
    throw ShapeError("theorem_error_oracle: dimension mismatch");
  (void)y1;

  Vec diff(pairs);
  for (std::size_t i = 0; i < pairs; ++i) diff[i] = x1[i] - x0[i];
  Vec hat = graph_fourier(dec.eigenvectors, diff);
  for (std::size_t i = 0; i < pairs; ++i) hat[i] *= g_lap[i];
  const Vec z = inverse_graph_fourier(dec.eigenvectors, hat);

  TheoremError out;
  for (std::size_t l = 0; l < pairs; ++l) {
    const double pred = 1.0 / (1.0 + std::exp(z[l]));
    const double r = pred - y0[l];
    out.er += r * r;
  }
  out.er_bar = pairs > 0 ? out.er / static_cast<double>(pairs) : 0.0;  // (2/n)Er, n = 2L
  return out;
}

double clamp_psi(double x, double a) {
  const double m = std::fabs(a);
  return std::min(std::max(x, -m), m);
}

TheoremBoundResult theorem_bound(const Vec& g_raw, const Vec& delta, const Vec& eta,
                                 const Vec& h_hat, double eps) {
  const std::size_t pairs = g_raw.size();
  if (delta.size() != pairs || eta.size() != pairs || h_hat.size() != pairs)
    throw ShapeError("theorem_bound: dimension mismatch");
  const Vec g_lap = sanitize_unit_interval(g_raw, "theorem_bound");

  TheoremBoundResult res;
  res.c1 = 0.25 + 217.0 / 2304.0 + 1.0 / ((1.0 + M_E) * (1.0 + M_E));

  // m_g = min over I_{g,delta,eta} of psi_{1/(g delta)}(eta) * delta.
  bool any = false;
  for (std::size_t i = 0; i < pairs; ++i) {
    if (g_lap[i] == 0.0 || delta[i] == 0.0 || eta[i] == 0.0) continue;
    const double limit = 1.0 / (g_lap[i] * delta[i]);
    const double eta_tilde = clamp_psi(eta[i], limit);
    const double v = eta_tilde * delta[i];
    if (!any || v < res.m_g) res.m_g = v;
    any = true;
  }
  if (!any) throw DegenerateError("theorem_bound: index set I_{g,delta,eta} is empty");

  // Log sums over I_{delta,eta~}, excluding |h_hat| below eps.
  double sum_log = 0.0;
  double sum_g = 0.0;
  double sum_gh = 0.0;
  for (std::size_t i = 0; i < pairs; ++i) {
    if (delta[i] == 0.0 || eta[i] == 0.0) continue;
    const double mag = std::fabs(h_hat[i]);
    if (mag < eps) {
      res.report.excluded_indices.push_back(static_cast<int>(i));
      continue;
    }
    sum_log += std::log(mag);
    sum_g += g_lap[i];
    sum_gh += g_lap[i] * mag;
  }
  if (sum_g == 0.0) throw DegenerateError("theorem_bound: filter response sums to zero on I");

  res.numerator = res.m_g * sum_log;
  res.denominator = std::log(sum_gh) - std::log(sum_g);
  res.denominator_ok = std::isfinite(res.denominator) && res.denominator > eps;

  const double n_total = 2.0 * static_cast<double>(pairs);
  if (res.denominator_ok) {
    res.report.lhs = res.c1 - res.numerator / (2.0 * n_total * res.denominator);
  } else {
    res.report.lhs = kNan;
  }
  res.report.rhs = kNan;

  std::ostringstream notes;
  notes << "c1=" << res.c1 << " m_g=" << res.m_g << " numerator=" << res.numerator
        << " log-denominator=" << res.denominator
        << (res.denominator_ok ? "" : " (below eps; bound not evaluated)")
        << "; excluded=" << res.report.excluded_indices.size();
  res.report.notes = notes.str();
  return res;
}

TheoremInstance build_theorem_instance(const Graph& g, int feature_column) {
  if (g.num_classes != 2) throw DegenerateError("theorem instance requires a binary task");
  if (feature_column < 0 || feature_column >= g.feature_dim())
    throw IndexError("theorem instance: feature column out of range");

  TheoremInstance inst;
  for (int v = 0; v < g.num_nodes; ++v)
    (g.labels[v] == 0 ? inst.class0 : inst.class1).push_back(v);
  if (inst.class0.empty() || inst.class1.empty())
    throw DegenerateError("theorem instance: a class is empty");
  const std::size_t pairs = std::min(inst.class0.size(), inst.class1.size());
  inst.truncated = inst.class0.size() != inst.class1.size();
  inst.class0.resize(pairs);
  inst.class1.resize(pairs);

  // Quotient graph over pairs.
  std::vector<int> pair_of(g.num_nodes, -1);
  for (std::size_t l = 0; l < pairs; ++l) {
    pair_of[inst.class0[l]] = static_cast<int>(l);
    pair_of[inst.class1[l]] = static_cast<int>(l);
  }
  Graph skeleton;
  skeleton.num_nodes = static_cast<int>(pairs);
  std::vector<Edge> quot;
  for (auto [u, v] : g.edges) {
    const int pu = pair_of[u];
    const int pv = pair_of[v];
    if (pu >= 0 && pv >= 0 && pu != pv) quot.emplace_back(pu, pv);
  }
  skeleton.edges = canonicalize_edges(std::move(quot));
  inst.dec = eigendecompose(normalize_adjacency(skeleton, NormMode::sym));

  const Vec h = node_heterophily(g);
  Vec pair_h(pairs);
  inst.x0.resize(pairs);
  inst.x1.resize(pairs);
  inst.y0.assign(pairs, 0.0);
  inst.y1.assign(pairs, 1.0);
  for (std::size_t l = 0; l < pairs; ++l) {
    pair_h[l] = 0.5 * (h[inst.class0[l]] + h[inst.class1[l]]);
    inst.x0[l] = g.features.at(inst.class0[l], feature_column);
    inst.x1[l] = g.features.at(inst.class1[l], feature_column);
  }
  inst.h_hat = spectral_heterophily(inst.dec, pair_h);
  return inst;
}

Theorem1Check evaluate_theorem1(const Vec& g_lap, const SpectralDecomposition& dec, const Vec& x0,
                                const Vec& x1, const Vec& y0, const Vec& y1, const Vec& h_hat,
                                double eps) {
  const std::size_t pairs = dec.size();
  Vec dy(pairs), dx(pairs);
  for (std::size_t i = 0; i < pairs; ++i) {
    dy[i] = y1[i] - y0[i];
    dx[i] = x1[i] - x0[i];
  }
  const Vec delta = graph_fourier(dec.eigenvectors, dy);
  const Vec eta = graph_fourier(dec.eigenvectors, dx);

  Theorem1Check check;
  check.bound = theorem_bound(g_lap, delta, eta, h_hat, eps);
  check.error = theorem_error_oracle(g_lap, dec, x0, x1, y0, y1);
  check.bound.report.rhs = check.error.er_bar;
  check.bound.report.holds =
      check.bound.denominator_ok && check.bound.report.lhs >= check.bound.report.rhs;
  return check;
}

}  // namespace herofilter
