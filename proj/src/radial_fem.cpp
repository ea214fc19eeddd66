#include "wplap/radial_fem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace wplap {

namespace {

constexpr double kGaussNode = 0.577350269189625764509148780501957;

// sign(x) |x|^a, with 0 at x = 0
double signed_pow(double x, double a) {
  if (x == 0.0) return 0.0;
  return std::copysign(std::pow(std::abs(x), a), x);
}

double regularized_pow(double x, double delta, double a) {
  if (delta == 0.0) {
    if (x == 0.0) return a == 0.0 ? 1.0 : (a > 0.0 ? 0.0 : numerics::kInfinity);
    return std::pow(std::abs(x), a);
  }
  return std::pow(x * x + delta * delta, 0.5 * a);
}

}  // namespace

double surface_measure(int N) {
  return 2.0 * std::pow(M_PI, 0.5 * N) / std::tgamma(0.5 * N);
}

std::array<double, 2> RadialMesh::quad_points(std::size_t e) const {
  const double c = 0.5 * (nodes[e] + nodes[e + 1]);
  const double h = 0.5 * width(e);
  return {c - h * kGaussNode, c + h * kGaussNode};
}

std::array<double, 2> RadialMesh::quad_weights(std::size_t e) const {
  const double h = 0.5 * width(e);
  return {h, h};
}

MeshPtr build_mesh(double eps, double R, std::size_t M, double grading) {
  if (!(eps > 0.0) || !(R > eps) || !std::isfinite(R)) {
    throw std::invalid_argument("build_mesh: require 0 < eps < R < inf");
  }
  if (M < 2) throw std::invalid_argument("build_mesh: require M >= 2");
  if (!(grading >= 1.0) || !std::isfinite(grading)) {
    throw std::invalid_argument("build_mesh: require grading >= 1");
  }
  auto mesh = std::make_shared<RadialMesh>();
  mesh->grading = grading;
  mesh->nodes.resize(M + 1);
  // h_0 (1 + g + ... + g^{M-1}) = R - eps
  double sum = 0.0, g = 1.0;
  for (std::size_t e = 0; e < M; ++e) {
    sum += g;
    g *= grading;
  }
  const double h0 = (R - eps) / sum;
  mesh->nodes[0] = eps;
  double h = h0;
  for (std::size_t i = 1; i < M; ++i) {
    mesh->nodes[i] = mesh->nodes[i - 1] + h;
    h *= grading;
  }
  mesh->nodes[M] = R;
  for (std::size_t i = 0; i < M; ++i) {
    if (!(mesh->nodes[i + 1] > mesh->nodes[i])) {
      throw std::invalid_argument("build_mesh: grading too strong for double precision");
    }
  }
  return mesh;
}

MeshPtr build_log_mesh(double eps, double R, std::size_t M) {
  if (!(eps > 0.0) || !(R > eps)) throw std::invalid_argument("build_log_mesh: require 0 < eps < R");
  if (M < 2) throw std::invalid_argument("build_log_mesh: require M >= 2");
  auto mesh = std::make_shared<RadialMesh>();
  mesh->grading = std::pow(R / eps, 1.0 / static_cast<double>(M));
  mesh->nodes = log_grid(eps, R, M + 1);
  return mesh;
}

MeshPtr extend_mesh(const RadialMesh& mesh, double R_new) {
  if (!(R_new > mesh.R())) throw std::invalid_argument("extend_mesh: R_new must exceed R");
  auto out = std::make_shared<RadialMesh>(mesh);
  const double g = mesh.grading;
  double h = mesh.width(mesh.elements() - 1) * g;
  double r = mesh.R();
  while (r + 1.5 * h < R_new) {
    r += h;
    out->nodes.push_back(r);
    h *= g;
  }
  out->nodes.push_back(R_new);
  return out;
}

DiscreteFunction DiscreteFunction::zero(MeshPtr mesh, bool dirichlet_at_R) {
  DiscreteFunction u;
  u.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh->nodes.size()));
  u.mesh = std::move(mesh);
  u.dirichlet_at_R = dirichlet_at_R;
  return u;
}

Eigen::Index DiscreteFunction::free_count() const {
  return values.size() - (dirichlet_at_R ? 1 : 0);
}

void DiscreteFunction::enforce() {
  if (dirichlet_at_R) values[values.size() - 1] = 0.0;
}

double DiscreteFunction::at(double r) const {
  const auto& x = mesh->nodes;
  if (r <= x.front()) return values[0];
  if (r >= x.back()) return values[values.size() - 1];
  const auto e = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), r) - x.begin()) - 1;
  const double t = (r - x[e]) / (x[e + 1] - x[e]);
  return (1.0 - t) * values[e] + t * values[e + 1];
}

std::string DiscreteFunction::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "r,u\n";
  for (std::size_t i = 0; i < mesh->nodes.size(); ++i) {
    os << mesh->nodes[i] << ',' << values[static_cast<Eigen::Index>(i)] << '\n';
  }
  return os.str();
}

Assembler::Assembler(MeshPtr mesh, const ProblemSpec& spec)
    : mesh_(std::move(mesh)), p_(spec.p), N_(spec.N), omega_(surface_measure(spec.N)) {
  const std::size_t ne = mesh_->elements();
  lw_.resize(static_cast<Eigen::Index>(ne));
  kw_.resize(static_cast<Eigen::Index>(ne), 2);
  phi_left_.resize(static_cast<Eigen::Index>(ne), 2);
  for (std::size_t e = 0; e < ne; ++e) {
    const auto rq = mesh_->quad_points(e);
    const auto wq = mesh_->quad_weights(e);
    const auto ei = static_cast<Eigen::Index>(e);
    double lw = 0.0;
    for (int q = 0; q < 2; ++q) {
      const double r = rq[q];
      const double jac = std::pow(r, N_ - 1);
      const double Lr = spec.L(r);
      const double Kr = spec.K(r);
      if (!std::isfinite(Lr) || !std::isfinite(Kr)) {
        std::ostringstream os;
        os << "non-finite weight on element " << e << " [" << mesh_->nodes[e] << ", "
           << mesh_->nodes[e + 1] << "]: L(" << r << ") = " << Lr << ", K = " << Kr;
        throw AssemblyError(os.str());
      }
      lw += wq[q] * Lr * jac;
      kw_(ei, q) = wq[q] * Kr * jac;
      phi_left_(ei, q) = (mesh_->nodes[e + 1] - r) / mesh_->width(e);
    }
    lw_[ei] = lw;
  }
}

void Assembler::check_same_mesh(const DiscreteFunction& u) const {
  if (u.values.size() != static_cast<Eigen::Index>(mesh_->nodes.size())) {
    throw std::invalid_argument("discrete function does not live on the assembler's mesh");
  }
}

AssembledFunctionals Assembler::assemble(const DiscreteFunction& u) const {
  check_same_mesh(u);
  const Eigen::VectorXd& x = u.values;
  const Eigen::Index n = x.size();
  AssembledFunctionals out;
  out.grad_I = Eigen::VectorXd::Zero(n);
  out.grad_G = Eigen::VectorXd::Zero(n);
  double I = 0.0, G = 0.0;
  for (Eigen::Index e = 0; e + 1 < n; ++e) {
    const double h = mesh_->width(static_cast<std::size_t>(e));
    const double s = (x[e + 1] - x[e]) / h;
    I += std::pow(std::abs(s), p_) * lw_[e];
    const double dI = p_ * signed_pow(s, p_ - 1.0) * lw_[e] / h;
    out.grad_I[e] -= dI;
    out.grad_I[e + 1] += dI;
    for (int q = 0; q < 2; ++q) {
      const double phl = phi_left_(e, q);
      const double uq = phl * x[e] + (1.0 - phl) * x[e + 1];
      G += kw_(e, q) * std::pow(std::abs(uq), p_);
      const double dG = p_ * kw_(e, q) * signed_pow(uq, p_ - 1.0);
      out.grad_G[e] += dG * phl;
      out.grad_G[e + 1] += dG * (1.0 - phl);
    }
  }
  out.I_val = omega_ * I;
  out.G_val = omega_ * G;
  out.grad_I *= omega_;
  out.grad_G *= omega_;
  if (u.dirichlet_at_R) {
    out.grad_I[n - 1] = 0.0;
    out.grad_G[n - 1] = 0.0;
  }
  return out;
}

double Assembler::I(const DiscreteFunction& u) const {
  check_same_mesh(u);
  const Eigen::VectorXd& x = u.values;
  double I = 0.0;
  for (Eigen::Index e = 0; e + 1 < x.size(); ++e) {
    const double s = (x[e + 1] - x[e]) / mesh_->width(static_cast<std::size_t>(e));
    I += std::pow(std::abs(s), p_) * lw_[e];
  }
  return omega_ * I;
}

double Assembler::G(const DiscreteFunction& u) const {
  check_same_mesh(u);
  const Eigen::VectorXd& x = u.values;
  double G = 0.0;
  for (Eigen::Index e = 0; e + 1 < x.size(); ++e) {
    for (int q = 0; q < 2; ++q) {
      const double phl = phi_left_(e, q);
      G += kw_(e, q) * std::pow(std::abs(phl * x[e] + (1.0 - phl) * x[e + 1]), p_);
    }
  }
  return omega_ * G;
}

Tridiagonal Assembler::hessian_I(const DiscreteFunction& u, double delta) const {
  check_same_mesh(u);
  const Eigen::VectorXd& x = u.values;
  const Eigen::Index n = x.size();
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n), off = Eigen::VectorXd::Zero(n - 1);
  for (Eigen::Index e = 0; e + 1 < n; ++e) {
    const double h = mesh_->width(static_cast<std::size_t>(e));
    const double s = (x[e + 1] - x[e]) / h;
    const double k = omega_ * p_ * (p_ - 1.0) * regularized_pow(s, delta, p_ - 2.0) * lw_[e] / (h * h);
    diag[e] += k;
    diag[e + 1] += k;
    off[e] -= k;
  }
  return Tridiagonal::symmetric(diag, off).leading(u.free_count());
}

Tridiagonal Assembler::hessian_G(const DiscreteFunction& u, double delta) const {
  check_same_mesh(u);
  const Eigen::VectorXd& x = u.values;
  const Eigen::Index n = x.size();
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n), off = Eigen::VectorXd::Zero(n - 1);
  for (Eigen::Index e = 0; e + 1 < n; ++e) {
    for (int q = 0; q < 2; ++q) {
      const double phl = phi_left_(e, q);
      const double phr = 1.0 - phl;
      const double uq = phl * x[e] + phr * x[e + 1];
      const double c = omega_ * p_ * (p_ - 1.0) * kw_(e, q) * regularized_pow(uq, delta, p_ - 2.0);
      diag[e] += c * phl * phl;
      diag[e + 1] += c * phr * phr;
      off[e] += c * phl * phr;
    }
  }
  return Tridiagonal::symmetric(diag, off).leading(u.free_count());
}

Eigen::VectorXd Assembler::load_vector(const WeightFunction& h, bool dirichlet_at_R,
                                       double tol) const {
  const auto& x = mesh_->nodes;
  const Eigen::Index n = static_cast<Eigen::Index>(x.size());
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  numerics::QuadratureOptions opts;
  opts.tol = tol;
  opts.breakpoints = h.breakpoints();
  for (Eigen::Index e = 0; e + 1 < n; ++e) {
    const double a = x[static_cast<std::size_t>(e)], c = x[static_cast<std::size_t>(e) + 1];
    const double width = c - a;
    auto integrate = [&](auto&& hat) {
      const auto res = numerics::integrate(
          [&](double r) { return h(r) * hat(r) * std::pow(r, N_ - 1); }, a, c, opts);
      if (!res.convergent()) {
        std::ostringstream os;
        os << "load vector quadrature failed on element " << e << " [" << a << ", " << c << "]";
        throw AssemblyError(os.str());
      }
      return res.value;
    };
    b[e] += integrate([&](double r) { return (c - r) / width; });
    b[e + 1] += integrate([&](double r) { return (r - a) / width; });
  }
  b *= omega_;
  if (dirichlet_at_R) b[n - 1] = 0.0;
  return b;
}

bool Assembler::has_positive_K() const {
  return (kw_.array() > 0.0).any();
}

}  // namespace wplap
