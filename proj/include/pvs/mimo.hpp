#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pvs/composite.hpp"

namespace pvs::mimo {

/// One realization of y = H s* + e with M-PSK symbols s*.
struct MimoInstance {
  int U = 0;  ///< transmit antennas
  int B = 0;  ///< receive antennas
  int M = 0;  ///< PSK order
  double snr_db = 0.0;
  double sigma2 = 0.0;  ///< 10^(-snr_db/10); zero for snr_db = +inf
  CMat H;               ///< B x U
  std::vector<int> s_indices;
  CVec noise;  ///< e, B entries
  CVec y;      ///< B entries
  std::uint64_t seed = 0;

  /// s* as complex symbols exp(i 2 pi m / M).
  CVec symbols() const;
};

/// H = sqrt(R) G with [R]_{jk} = 0.5^|j-k|, G_{bu} ~ CN(0, 1/U), e_b ~ CN(0, sigma2) and
/// uniform symbols. Deterministic in `seed`; snr_db = +inf gives a noiseless instance.
MimoInstance generate_instance(int U, int B, int M, double snr_db, std::uint64_t seed);

/// B x B Toeplitz correlation 0.5^|j-k|.
Mat toeplitz_correlation(int B);

/// Symmetric PSD square root via eigendecomposition.
Mat symmetric_sqrt(const Mat& R);

/// [Re z; Im z].
Vec realify_vector(const CVec& z);
/// [[Re H, -Im H], [Im H, Re H]].
Mat realify_matrix(const CMat& H);

/// F(r, theta) = [r .* sin(theta); r .* cos(theta)].
Vec polar_map(const Vec& r, const Vec& theta);

/// sin(M t / 2), returning exactly 0 when M t / (2 pi) is an integer up to rounding.
double sin_half_multiple(int M, double t);
/// cos(M t / 2), evaluated on the same reduced argument as sin_half_multiple.
double cos_half_multiple(int M, double t);

struct PolarParams {
  double lambda_r = 0.1;
  double lambda_theta = 0.1;
  double r_lower = 0.1;
};

/// lambda_r sum 1/r_u + lambda_theta ||sin(M theta / 2)||_1. Throws on r_u <= 0.
double regularizer_value(const Vec& r, const Vec& theta, double lambda_r, double lambda_theta,
                         int M);

/// 4((2 + sqrt U) ||H||^2 + ||H^T y||) + 2 sqrt(U) lambda_r r_lower^-4 + sqrt(U) lambda_theta M / 2.
double polar_varpi1(int U, double h_op_norm, double hty_norm, double lambda_r,
                    double lambda_theta, double r_lower, int M);
/// M^2 / 4.
double polar_varpi2(int M);

/// The polar detection model as a composite problem over x = [r; theta] in R^{2U}:
///   h = 0.5 ||y - H F(r,theta)||^2 + lambda_r sum 1/r_u,  S = sin(M theta / 2),
///   g = lambda_theta ||.||_1 (declared eta = 1),  phi = indicator of [r_lower,1]^U x R^U.
CompositeProblem build_polar_problem(const MimoInstance& instance, const PolarParams& params);

/// Same model from real-lifted data (H is 2B x 2U, y is 2B).
CompositeProblem build_polar_problem(const Mat& H, const Vec& y, int M, const PolarParams& params);

/// Maps a real-lifted symbol estimate to a feasible polar point: r clamped to
/// [r_lower, 1], theta = atan2(Re, Im) so that F(r, theta) reproduces its direction.
Vec polar_initial_point(const Vec& s_real, double r_lower);

/// F(r, theta) for x = [r; theta].
Vec polar_estimate(const Vec& x);

/// Real liftings of s_m = exp(i 2 pi m / M) * 1, m = 0..M-1.
std::vector<Vec> constellation_shifts(int U, int M);

/// Nearest-angle M-PSK decision on the pairs (s[u], s[u+U]) read as (Re, Im).
/// Ties go to the smaller index. M must be a power of two.
std::vector<int> psk_demodulate(const Vec& s_real, int M);

int gray_encode(int m);

/// Differing Gray-coded bits over U log2(M).
double bit_error_rate(const std::vector<int>& est, const std::vector<int>& truth, int M);

/// Binary container: magic, (U, B, M, snr_db, sigma2, seed) header, then H, s*, e, y
/// as little-endian 64-bit values.
void save_instance(std::ostream& out, const MimoInstance& inst);
MimoInstance load_instance(std::istream& in);
void save_instance(const std::string& path, const MimoInstance& inst);
MimoInstance load_instance(const std::string& path);

bool is_power_of_two(int M);

}  // namespace pvs::mimo
