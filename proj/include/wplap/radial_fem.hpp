#pragma once

#include <array>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "wplap/tridiagonal.hpp"
#include "wplap/weights.hpp"

namespace wplap {

class AssemblyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// omega_{N-1} = 2 pi^{N/2} / Gamma(N/2), the area of the unit sphere in R^N.
double surface_measure(int N);

/// Nodes eps = r_0 < ... < r_M = R. Element e spans [r_e, r_{e+1}].
struct RadialMesh {
  std::vector<double> nodes;
  /// Ratio of consecutive element widths, h_{e+1} / h_e.
  double grading = 1.0;

  std::size_t elements() const { return nodes.size() - 1; }
  double eps() const { return nodes.front(); }
  double R() const { return nodes.back(); }
  double width(std::size_t e) const { return nodes[e + 1] - nodes[e]; }

  /// Two-point Gauss rule on element e: {r_0, r_1} and {w_0, w_1}; the
  /// weights sum to the element width.
  std::array<double, 2> quad_points(std::size_t e) const;
  std::array<double, 2> quad_weights(std::size_t e) const;
};

using MeshPtr = std::shared_ptr<const RadialMesh>;

/// Geometric spacing refined toward eps; grading = 1 gives a uniform mesh.
MeshPtr build_mesh(double eps, double R, std::size_t M, double grading);
/// Nodes uniform in log r.
MeshPtr build_log_mesh(double eps, double R, std::size_t M);
/// Keeps every node of `mesh` and continues the spacing out to R_new > R.
MeshPtr extend_mesh(const RadialMesh& mesh, double R_new);

/// Nodal values of a continuous piecewise-linear function.
struct DiscreteFunction {
  MeshPtr mesh;
  Eigen::VectorXd values;
  bool dirichlet_at_R = true;

  static DiscreteFunction zero(MeshPtr mesh, bool dirichlet_at_R = true);
  template <class F>
  static DiscreteFunction sample(MeshPtr mesh, F&& f, bool dirichlet_at_R = true) {
    DiscreteFunction u = zero(mesh, dirichlet_at_R);
    for (std::size_t i = 0; i < mesh->nodes.size(); ++i) u.values[i] = f(mesh->nodes[i]);
    u.enforce();
    return u;
  }

  /// Number of unconstrained nodes; they come first.
  Eigen::Index free_count() const;
  /// Sets the Dirichlet node to zero when the flag is set.
  void enforce();
  /// Value at radius r inside [eps, R].
  double at(double r) const;
  /// Two columns r,u with a header, 17 significant digits.
  std::string to_csv() const;
};

struct AssembledFunctionals {
  double I_val = 0.0;
  double G_val = 0.0;
  Eigen::VectorXd grad_I;
  Eigen::VectorXd grad_G;
};

/// Element integrals of the spec's weights on a fixed mesh.
///
/// I(u) = omega sum_e |u'_e|^p int_e L r^{N-1} dr with the weight integral by
/// two-point Gauss; G(u) = omega sum over Gauss points of w K r^{N-1} |u|^p.
/// Gradients are exact derivatives of these sums and vanish at the Dirichlet
/// node.
class Assembler {
 public:
  Assembler(MeshPtr mesh, const ProblemSpec& spec);

  const RadialMesh& mesh() const { return *mesh_; }
  const MeshPtr& mesh_ptr() const { return mesh_; }
  double p() const { return p_; }
  double omega() const { return omega_; }
  /// int_e L r^{N-1} dr for each element.
  const Eigen::VectorXd& stiffness_weights() const { return lw_; }
  /// w_q K(r_q) r_q^{N-1} per element (rows) and Gauss point (columns).
  const Eigen::MatrixXd& mass_weights() const { return kw_; }
  /// Left hat function at each Gauss point; the right hat is 1 minus it.
  const Eigen::MatrixXd& left_hat() const { return phi_left_; }

  AssembledFunctionals assemble(const DiscreteFunction& u) const;
  double I(const DiscreteFunction& u) const;
  double G(const DiscreteFunction& u) const;

  /// Tridiagonal Hessians over the free nodes, with |s|^{p-2} replaced by
  /// (s^2 + delta^2)^{(p-2)/2}. delta = 0 gives the exact Hessian for p >= 2.
  Tridiagonal hessian_I(const DiscreteFunction& u, double delta) const;
  Tridiagonal hessian_G(const DiscreteFunction& u, double delta) const;

  /// b_i = omega int h phi_i r^{N-1} dr by adaptive quadrature on each
  /// element; zero at the Dirichlet node when `dirichlet_at_R`.
  Eigen::VectorXd load_vector(const WeightFunction& h, bool dirichlet_at_R = true,
                              double tol = 1e-12) const;

  /// True when some Gauss point carries K > 0.
  bool has_positive_K() const;

 private:
  void check_same_mesh(const DiscreteFunction& u) const;

  MeshPtr mesh_;
  double p_;
  int N_;
  double omega_;
  Eigen::VectorXd lw_;
  // per element and Gauss point: w_q K(r_q) r_q^{N-1}, and phi_left(r_q)
  Eigen::MatrixXd kw_;
  Eigen::MatrixXd phi_left_;
};

}  // namespace wplap
