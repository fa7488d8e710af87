#pragma once

#include "mgverify/gaussian.hpp"
#include "mgverify/rng.hpp"

namespace mgv {

/// Haar-random element of SO(dim): QR of a Gaussian matrix with the R-sign
/// correction, then one column flipped if det = -1.
RMatrix haar_orthogonal(int dim, Rng& rng);

/// Gaussian state R Gamma_0 R^T for Haar-random R in SO(2n).
CovarianceState mg_haar_state(int n, Rng& rng);

/// Haar-random pure state (normalized complex Gaussian vector).
StateVector haar_state(int n, Rng& rng);

}  // namespace mgv
