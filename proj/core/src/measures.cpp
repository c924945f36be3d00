#include "vpme/measures.hpp"

#include <cmath>

#include "vpme/error.hpp"

namespace vpme {

namespace {

bool uniform_weights(const Cloud& c) {
  if (c.uniform()) return true;
  const double w = 1.0 / static_cast<double>(c.size());
  for (double x : c.weights)
    if (std::abs(x - w) > 1e-15) return false;
  return true;
}

double root_p(double cost, int p) { return p == 2 ? std::sqrt(std::max(cost, 0.0)) : std::max(cost, 0.0); }

void check_pair(const Cloud& a, const Cloud& b, const MetricSpec& spec) {
  spec.validate();
  a.validate();
  b.validate();
  if (a.dim != b.dim) throw InvalidArgument("wasserstein: dimension mismatch");
}

}  // namespace

DistanceResult wasserstein_exact(const Cloud& a, const Cloud& b, const MetricSpec& spec) {
  check_pair(a, b, spec);
  if (a.size() != b.size())
    throw InvalidArgument("wasserstein_exact: size mismatch, use the semi-discrete or auction path");
  if (!uniform_weights(a) || !uniform_weights(b)) throw InvalidArgument("wasserstein_exact: weights must be uniform");
  if (a.size() > kExactSizeLimit) throw InvalidArgument("wasserstein_exact: size exceeds the exact-solver limit");

  const std::size_t n = a.size();
  const PairCost pc(a, b, spec);
  const auto cost = pc.dense();
  DistanceResult out;
  out.plan.source = a;
  out.plan.target = b;
  out.plan.metric = spec;
  out.plan.permutation = solve_assignment(cost, n);
  const double w = 1.0 / static_cast<double>(n);
  out.plan.entries.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = out.plan.permutation[i];
    out.plan.entries.push_back({i, j, w, cost[i * n + j]});
    out.plan.total_cost += w * cost[i * n + j];
  }
  out.distance = root_p(out.plan.total_cost, spec.p);
  return out;
}

AuctionDistance wasserstein_auction(const Cloud& a, const Cloud& b, const MetricSpec& spec, const AuctionOptions& opts) {
  check_pair(a, b, spec);
  if (!uniform_weights(a) || !uniform_weights(b)) throw InvalidArgument("wasserstein_auction: weights must be uniform");
  const bool a_bids = a.size() >= b.size();
  const Cloud& bidders = a_bids ? a : b;
  const Cloud& objects = a_bids ? b : a;
  if (bidders.size() % objects.size() != 0)
    throw InvalidArgument("wasserstein_auction: cloud sizes must divide one another");

  const PairCost pc(bidders, objects, spec);
  const auto res = auction_transport(pc, opts);
  AuctionDistance out;
  out.plan.source = a;
  out.plan.target = b;
  out.plan.metric = spec;
  const double w = 1.0 / static_cast<double>(bidders.size());
  out.plan.entries.reserve(bidders.size());
  for (std::size_t i = 0; i < bidders.size(); ++i) {
    const std::size_t j = res.object_of[i];
    const double c = pc(i, j);
    out.plan.entries.push_back(a_bids ? PlanEntry{i, j, w, c} : PlanEntry{j, i, w, c});
    out.plan.total_cost += w * c;
  }
  if (a.size() == b.size()) {
    out.plan.permutation.assign(a.size(), 0);
    for (const auto& e : out.plan.entries) out.plan.permutation[e.i] = e.j;
  }
  out.distance = root_p(out.plan.total_cost, spec.p);
  out.error_bound = res.error_bound;
  out.bids = res.bids;
  return out;
}

EntropicResult wasserstein_entropic(const Cloud& a, const Cloud& b, const MetricSpec& spec, double reg, double tol) {
  check_pair(a, b, spec);
  if (!(tol > 0.0)) throw InvalidArgument("wasserstein_entropic: tolerance must be positive");
  auto weights = [](const Cloud& c) {
    std::vector<double> w(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) w[i] = c.weight(i);
    return w;
  };
  const auto wa = weights(a);
  const auto wb = weights(b);
  SinkhornOptions opts;
  opts.reg = reg;
  opts.tolerance = tol;

  const auto ab = sinkhorn_log(PairCost(a, b, spec).dense(), wa, wb, opts);
  const auto aa = sinkhorn_log(PairCost(a, a, spec).dense(), wa, wa, opts);
  const auto bb = sinkhorn_log(PairCost(b, b, spec).dense(), wb, wb, opts);

  EntropicResult out;
  out.reg = reg;
  out.divergence = std::max(0.0, ab.dual_value - 0.5 * aa.dual_value - 0.5 * bb.dual_value);
  out.distance = root_p(out.divergence, spec.p);
  out.iterations = ab.iterations + aa.iterations + bb.iterations;
  out.marginal_error = std::max({ab.marginal_error, aa.marginal_error, bb.marginal_error});
  return out;
}

double wasserstein(const Cloud& a, const Cloud& b, const MetricSpec& spec, std::string* method) {
  const bool uni = uniform_weights(a) && uniform_weights(b);
  const std::size_t big = std::max(a.size(), b.size());
  const std::size_t small = std::min(a.size(), b.size());
  if (uni && a.size() == b.size() && a.size() <= kExactSizeLimit) {
    if (method) *method = "exact";
    return wasserstein_exact(a, b, spec).distance;
  }
  if (uni && small > 0 && big % small == 0) {
    if (method) *method = "auction";
    return wasserstein_auction(a, b, spec).distance;
  }
  if (method) *method = "entropic";
  return wasserstein_entropic(a, b, spec).distance;
}

QuadratureReference make_quadrature(const DensitySpec& f0, std::size_t m, const MetricSpec& spec, bool estimate_floor) {
  f0.validate();
  spec.validate();
  if (m == 0) throw InvalidArgument("quadrature: size must be positive");
  QuadratureReference q;
  q.f0 = f0;
  q.cloud = to_cloud(quiet_start(f0, m));
  if (estimate_floor) q.r_quad = wasserstein_auction(to_cloud(quiet_start(f0, 4 * m)), q.cloud, spec).distance;
  return q;
}

SemiDiscreteResult semi_discrete_distance(const QuadratureReference& q, const ParticleEnsemble& e,
                                          const MetricSpec& spec) {
  e.validate();
  if (e.dim != q.f0.dim) throw InvalidArgument("semi_discrete_distance: dimension mismatch");
  if (q.cloud.size() < 4 * e.size()) throw InvalidArgument("semi_discrete_distance: quadrature size must be >= 4N");
  SemiDiscreteResult out;
  out.distance = wasserstein(q.cloud, to_cloud(e), spec, &out.method);
  out.r_quad = q.r_quad;
  out.quadrature_size = q.cloud.size();
  return out;
}

SemiDiscreteResult semi_discrete_distance(const DensitySpec& f0, const ParticleEnsemble& e, const MetricSpec& spec,
                                          std::size_t m) {
  if (m < 4 * e.size()) throw InvalidArgument("semi_discrete_distance: quadrature size must be >= 4N");
  return semi_discrete_distance(make_quadrature(f0, m, spec), e, spec);
}

double anisotropic_D(const TransportPlan& plan, double lambda) {
  if (!(lambda >= 1.0)) throw InvalidArgument("anisotropic_D: lambda must be >= 1");
  const MetricSpec spec{2, lambda};
  double s = 0.0;
  for (const auto& e : plan.entries)
    s += e.weight * phase_space_cost(plan.source.x[e.i], plan.source.v[e.i], plan.target.x[e.j], plan.target.v[e.j],
                                     plan.source.dim, spec);
  return s;
}

Cloud scale_velocities(const Cloud& c, double R) {
  if (!(R > 0.0)) throw InvalidArgument("scale_velocities: R must be positive");
  Cloud out = c;
  for (auto& v : out.v)
    for (auto& x : v) x /= R;
  return out;
}

ParticleEnsemble scale_velocities(const ParticleEnsemble& e, double R) {
  if (!(R > 0.0)) throw InvalidArgument("scale_velocities: R must be positive");
  ParticleEnsemble out = e;
  for (auto& v : out.velocities)
    for (auto& x : v) x /= R;
  return out;
}

Cloud mollify_cloud(const Cloud& c, const std::vector<Vec>& offsets) {
  if (offsets.empty()) throw InvalidArgument("mollify_cloud: no offsets");
  Cloud out;
  out.dim = c.dim;
  out.x.reserve(c.size() * offsets.size());
  out.v.reserve(c.size() * offsets.size());
  const bool weighted = !c.uniform();
  for (std::size_t i = 0; i < c.size(); ++i)
    for (const auto& y : offsets) {
      Vec x{0.0, 0.0, 0.0};
      for (int k = 0; k < c.dim; ++k) x[k] = wrap_unit(c.x[i][k] + y[k]);
      out.x.push_back(x);
      out.v.push_back(c.v[i]);
      if (weighted) out.weights.push_back(c.weights[i] / static_cast<double>(offsets.size()));
    }
  return out;
}

TailBound fg_tail(double n, double x, const TailParams& t) {
  if (!(n >= 1.0)) throw InvalidArgument("fg_tail: N must be >= 1");
  if (!(x > 0.0)) throw InvalidArgument("fg_tail: x must be positive");
  if (t.m < 1) throw InvalidArgument("fg_tail: ambient dimension must be >= 1");
  if (t.p != 1 && t.p != 2) throw InvalidArgument("fg_tail: p must be 1 or 2");
  if (!(t.c > 0.0) || !(t.C > 0.0)) throw InvalidArgument("fg_tail: constants must be positive");
  if (t.mode == TailMode::moment) {
    if (!(t.k > 2.0 * t.p)) throw InvalidArgument("fg_tail: moment order must exceed 2p");
    if (!(t.alpha > 0.0 && t.alpha < t.k)) throw InvalidArgument("fg_tail: alpha must lie in (0, k)");
  }
  TailBound out;
  const int twice_p = 2 * t.p;
  double expo = 0.0;
  if (twice_p > t.m) {
    expo = x * x;
  } else if (twice_p == t.m) {
    const double y = x / std::log(2.0 + 1.0 / x);
    expo = y * y;
  } else {
    expo = std::pow(x, static_cast<double>(t.m) / t.p);
  }
  out.a = t.C * std::exp(-t.c * n * expo);
  if (t.mode == TailMode::moment) out.b = t.C * n * std::pow(n * x, -(t.k - t.alpha) / t.p);
  out.bound = (x <= 1.0 ? out.a : 0.0) + out.b;
  return out;
}

}  // namespace vpme
