#include "vpme/transport.hpp"

#include <fstream>
#include <iomanip>

#include "vpme/error.hpp"

namespace vpme {

void MetricSpec::validate() const {
  if (p != 1 && p != 2) throw InvalidArgument("metric: p must be 1 or 2");
  if (!(lambda >= 1.0) || !std::isfinite(lambda)) throw InvalidArgument("metric: lambda must be >= 1");
}

void Cloud::validate() const {
  if (dim != 2 && dim != 3) throw InvalidArgument("cloud: dimension must be 2 or 3");
  if (x.empty()) throw InvalidArgument("cloud: empty");
  if (v.size() != x.size()) throw InvalidArgument("cloud: position/velocity count mismatch");
  if (!weights.empty()) {
    if (weights.size() != x.size()) throw InvalidArgument("cloud: weight count mismatch");
    double s = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) throw InvalidArgument("cloud: negative weight");
      s += w;
    }
    if (std::abs(s - 1.0) > 1e-9) throw InvalidArgument("cloud: weights do not sum to 1");
  }
  for (std::size_t i = 0; i < x.size(); ++i)
    for (int k = 0; k < dim; ++k) {
      if (!(x[i][k] >= 0.0 && x[i][k] < 1.0)) throw InvalidArgument("cloud: position outside [0,1)");
      if (!std::isfinite(v[i][k])) throw InvalidArgument("cloud: non-finite velocity");
    }
}

Cloud to_cloud(const ParticleEnsemble& e) {
  Cloud c;
  c.dim = e.dim;
  c.x = e.positions;
  c.v = e.velocities;
  return c;
}

Cloud position_marginal(const Cloud& c) {
  Cloud out = c;
  for (auto& v : out.v) v = Vec{0.0, 0.0, 0.0};
  return out;
}

double phase_space_cost(const Vec& x1, const Vec& v1, const Vec& x2, const Vec& v2, int dim, const MetricSpec& spec) {
  const double s = spec.lambda * spec.lambda * torus_dist2(x1, x2, dim) + [&] {
    double t = 0.0;
    for (int k = 0; k < dim; ++k) t += (v1[k] - v2[k]) * (v1[k] - v2[k]);
    return t;
  }();
  return spec.p == 2 ? s : std::sqrt(s);
}

namespace {

std::vector<double> pack(const Cloud& c) {
  const auto d = static_cast<std::size_t>(c.dim);
  std::vector<double> z(c.size() * 2 * d);
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t k = 0; k < d; ++k) {
      z[i * 2 * d + k] = c.x[i][k];
      z[i * 2 * d + d + k] = c.v[i][k];
    }
  return z;
}

}  // namespace

PairCost::PairCost(const Cloud& a, const Cloud& b, const MetricSpec& spec)
    : dim_(a.dim),
      stride_(2 * static_cast<std::size_t>(a.dim)),
      na_(a.size()),
      nb_(b.size()),
      lambda2_(spec.lambda * spec.lambda),
      p_(spec.p),
      a_(pack(a)),
      b_(pack(b)) {
  spec.validate();
  if (a.dim != b.dim) throw InvalidArgument("pair cost: dimension mismatch");
  b_soa_.resize(b_.size());
  for (std::size_t j = 0; j < nb_; ++j)
    for (std::size_t k = 0; k < stride_; ++k) b_soa_[k * nb_ + j] = b_[j * stride_ + k];
}

void PairCost::row(std::size_t i, double* out) const noexcept {
  const double* za = &a_[i * stride_];
  std::fill(out, out + nb_, 0.0);
  for (int k = 0; k < dim_; ++k) {
    const double xa = za[k];
    const double* xb = &b_soa_[static_cast<std::size_t>(k) * nb_];
    for (std::size_t j = 0; j < nb_; ++j) {
      double dx = std::abs(xa - xb[j]);
      dx = std::min(dx, 1.0 - dx);
      out[j] += lambda2_ * dx * dx;
    }
  }
  for (int k = dim_; k < 2 * dim_; ++k) {
    const double va = za[k];
    const double* vb = &b_soa_[static_cast<std::size_t>(k) * nb_];
    for (std::size_t j = 0; j < nb_; ++j) {
      const double dv = va - vb[j];
      out[j] += dv * dv;
    }
  }
  if (p_ == 1)
    for (std::size_t j = 0; j < nb_; ++j) out[j] = std::sqrt(out[j]);
}

std::vector<double> PairCost::dense() const {
  std::vector<double> c(na_ * nb_);
  for (std::size_t i = 0; i < na_; ++i) row(i, &c[i * nb_]);
  return c;
}

double TransportPlan::marginal_error() const {
  std::vector<double> ra(source.size(), 0.0);
  std::vector<double> rb(target.size(), 0.0);
  for (const auto& e : entries) {
    ra.at(e.i) += e.weight;
    rb.at(e.j) += e.weight;
  }
  double err = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) err = std::max(err, std::abs(ra[i] - source.weight(i)));
  for (std::size_t j = 0; j < rb.size(); ++j) err = std::max(err, std::abs(rb[j] - target.weight(j)));
  return err;
}

double TransportPlan::recomputed_cost() const {
  double s = 0.0;
  for (const auto& e : entries)
    s += e.weight * phase_space_cost(source.x[e.i], source.v[e.i], target.x[e.j], target.v[e.j], source.dim, metric);
  return s;
}

void TransportPlan::validate(double tol) const {
  if (marginal_error() > tol) throw InvalidArgument("transport plan: marginals do not match the clouds");
  if (std::abs(recomputed_cost() - total_cost) > tol) throw InvalidArgument("transport plan: stored cost is stale");
}

void write_plan_csv(const std::filesystem::path& path, const TransportPlan& plan) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << "i,j,weight,cost\n" << std::setprecision(17);
  for (const auto& e : plan.entries) os << e.i << ',' << e.j << ',' << e.weight << ',' << e.cost << '\n';
  if (!os) throw IoError("write failed: " + path.string());
}

}  // namespace vpme
