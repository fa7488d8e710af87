#include "mgverify/haar.hpp"

#include <Eigen/QR>

namespace mgv {

RMatrix haar_orthogonal(int dim, Rng& rng) {
  if (dim < 2 || dim % 2 != 0) throw ValidationError("haar_orthogonal needs an even dimension >= 2");
  std::normal_distribution<double> normal;
  RMatrix a(dim, dim);
  for (int j = 0; j < dim; ++j)
    for (int i = 0; i < dim; ++i) a(i, j) = normal(rng);
  Eigen::HouseholderQR<RMatrix> qr(a);
  RMatrix q = qr.householderQ() * RMatrix::Identity(dim, dim);
  const RMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < dim; ++j)
    if (r(j, j) < 0) q.col(j) *= -1.0;
  if (q.determinant() < 0) q.col(0) *= -1.0;
  return q;
}

CovarianceState mg_haar_state(int n, Rng& rng) {
  CovarianceState s(n);
  s.apply_orthogonal(haar_orthogonal(2 * n, rng));
  return s;
}

StateVector haar_state(int n, Rng& rng) {
  std::normal_distribution<double> normal;
  CVector v(Eigen::Index{1} << n);
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = cplx(normal(rng), normal(rng));
  v.normalize();
  return StateVector::from_amplitudes(std::move(v));
}

}  // namespace mgv
