#include <cmath>

#include <Eigen/Eigenvalues>

#include "mrt/discrete_field.hpp"

namespace mrt {

double hodge_ratio(const Grid2D& g, const Vec2& v) {
  Field a11 = d1(g, v.c1), a12 = d2(g, v.c1), a21 = d1(g, v.c2), a22 = d2(g, v.c2);
  double grad = g.inner(a11, a11) + g.inner(a12, a12) + g.inner(a21, a21) + g.inner(a22, a22);
  Field dv = a11 + a22, cv = a21 - a12;
  double dc = g.inner(dv, dv) + g.inner(cv, cv);
  return std::sqrt(grad / dc);
}

double hodge_constant(const Grid2D& g) {
  const int n2 = g.n2(), m = n2 - 2; // v1 at all nodes, v2 at interior nodes
  const double d = g.dy2();
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n2, n2);
  D(0, 0) = -3 / (2 * d), D(0, 1) = 4 / (2 * d), D(0, 2) = -1 / (2 * d);
  D(n2 - 1, n2 - 1) = 3 / (2 * d), D(n2 - 1, n2 - 2) = -4 / (2 * d), D(n2 - 1, n2 - 3) = 1 / (2 * d);
  for (int j = 1; j < n2 - 1; ++j) D(j, j + 1) = 1 / (2 * d), D(j, j - 1) = -1 / (2 * d);
  Eigen::VectorXd H = Eigen::VectorXd::Constant(n2, d);
  H[0] = H[n2 - 1] = d / 2;

  // embeddings: x = (a, b_interior); v1 = a sin(k y1), v2 = b cos(k y1)
  const int N = n2 + m;
  Eigen::MatrixXd Ea = Eigen::MatrixXd::Zero(n2, N), Eb = Eigen::MatrixXd::Zero(n2, N);
  for (int j = 0; j < n2; ++j) Ea(j, j) = 1;
  for (int j = 1; j < n2 - 1; ++j) Eb(j, n2 + j - 1) = 1;
  Eigen::MatrixXd Hm = H.asDiagonal();

  double C2 = 1.0;
  for (int k = 1; k < g.nk(); ++k) {
    double kap = g.kappa(k);
    if (kap == 0) continue;
    // d1 v1 = k a cos, d2 v1 = a' sin, d1 v2 = -k b sin, d2 v2 = b' cos
    Eigen::MatrixXd A1 = kap * Ea, A2 = D * Ea, B1 = -kap * Eb, B2 = D * Eb;
    Eigen::MatrixXd G = A1.transpose() * Hm * A1 + A2.transpose() * Hm * A2 + B1.transpose() * Hm * B1 +
                        B2.transpose() * Hm * B2;
    Eigen::MatrixXd Dv = A1 + B2;  // cos part
    Eigen::MatrixXd Cv = B1 - A2;  // sin part
    Eigen::MatrixXd Q = Dv.transpose() * Hm * Dv + Cv.transpose() * Hm * Cv;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(G, Q, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw std::runtime_error("hodge_constant: eigensolve failed");
    C2 = std::max(C2, es.eigenvalues().maxCoeff());
  }
  return std::sqrt(C2);
}

} // namespace mrt
