#include "pvs/mimo.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <memory>
#include <numbers>
#include <random>

namespace pvs::mimo {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr char kMagic[8] = {'P', 'V', 'S', 'M', 'I', 'M', 'O', '1'};

void require(bool cond, const char* msg) {
  if (!cond) throw ParameterError(msg);
}

double phase_of(int m, int M) { return 2.0 * kPi * m / M; }

// sin(pi q) and cos(pi q) after reducing q to the nearest integer.
struct Reduced {
  double frac;
  bool odd;
};

Reduced reduce(double q) {
  const double n = std::nearbyint(q);
  return {q - n, std::fmod(std::abs(n), 2.0) == 1.0};
}

}  // namespace

CVec MimoInstance::symbols() const {
  CVec s(U);
  for (int u = 0; u < U; ++u) s[u] = std::polar(1.0, phase_of(s_indices[u], M));
  return s;
}

Mat toeplitz_correlation(int B) {
  require(B >= 1, "B must be >= 1");
  Mat R(B, B);
  for (int j = 0; j < B; ++j)
    for (int k = 0; k < B; ++k) R(j, k) = std::pow(0.5, std::abs(j - k));
  return R;
}

Mat symmetric_sqrt(const Mat& R) {
  Eigen::SelfAdjointEigenSolver<Mat> es(R);
  if (es.info() != Eigen::Success) throw LinAlgError("eigendecomposition failed");
  const Vec root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

MimoInstance generate_instance(int U, int B, int M, double snr_db, std::uint64_t seed) {
  require(U >= 1 && B >= 1, "U and B must be >= 1");
  require(M >= 2, "M must be >= 2");
  require(!std::isnan(snr_db), "SNR must not be NaN");

  MimoInstance inst;
  inst.U = U;
  inst.B = B;
  inst.M = M;
  inst.snr_db = snr_db;
  inst.sigma2 = std::pow(10.0, -snr_db / 10.0);
  inst.seed = seed;

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> symbol(0, M - 1);
  std::normal_distribution<double> normal(0.0, 1.0);

  inst.s_indices.resize(U);
  for (int& m : inst.s_indices) m = symbol(rng);

  // CN(0, v): independent real and imaginary parts N(0, v/2).
  const double g_std = std::sqrt(0.5 / U);
  CMat G(B, U);
  for (int b = 0; b < B; ++b)
    for (int u = 0; u < U; ++u) {
      const double re = normal(rng), im = normal(rng);
      G(b, u) = {g_std * re, g_std * im};
    }
  inst.H = symmetric_sqrt(toeplitz_correlation(B)).cast<std::complex<double>>() * G;

  const double e_std = std::sqrt(0.5 * inst.sigma2);
  inst.noise.resize(B);
  for (int b = 0; b < B; ++b) {
    const double re = normal(rng), im = normal(rng);
    inst.noise[b] = {e_std * re, e_std * im};
  }
  inst.y = inst.H * inst.symbols() + inst.noise;
  return inst;
}

Vec realify_vector(const CVec& z) {
  Vec out(2 * z.size());
  out << z.real(), z.imag();
  return out;
}

Mat realify_matrix(const CMat& H) {
  const Eigen::Index b = H.rows(), u = H.cols();
  Mat out(2 * b, 2 * u);
  out.topLeftCorner(b, u) = H.real();
  out.topRightCorner(b, u) = -H.imag();
  out.bottomLeftCorner(b, u) = H.imag();
  out.bottomRightCorner(b, u) = H.real();
  return out;
}

Vec polar_map(const Vec& r, const Vec& theta) {
  if (r.size() != theta.size()) throw ParameterError("r and theta must have equal length");
  Vec out(2 * r.size());
  out << r.cwiseProduct(theta.array().sin().matrix()), r.cwiseProduct(theta.array().cos().matrix());
  return out;
}

double sin_half_multiple(int M, double t) {
  const double q = M * t / (2.0 * kPi);
  const Reduced red = reduce(q);
  if (std::abs(red.frac) <= 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(q)))
    return 0.0;
  const double s = std::sin(kPi * red.frac);
  return red.odd ? -s : s;
}

double cos_half_multiple(int M, double t) {
  const Reduced red = reduce(M * t / (2.0 * kPi));
  const double c = std::cos(kPi * red.frac);
  return red.odd ? -c : c;
}

double regularizer_value(const Vec& r, const Vec& theta, double lambda_r, double lambda_theta,
                         int M) {
  if (r.size() != theta.size()) throw ParameterError("r and theta must have equal length");
  if ((r.array() <= 0.0).any()) throw ParameterError("radii must be positive");
  double sin_l1 = 0.0;
  for (double t : theta) sin_l1 += std::abs(sin_half_multiple(M, t));
  return lambda_r * r.cwiseInverse().sum() + lambda_theta * sin_l1;
}

double polar_varpi1(int U, double h_op_norm, double hty_norm, double lambda_r,
                    double lambda_theta, double r_lower, int M) {
  const double su = std::sqrt(static_cast<double>(U));
  return 4.0 * ((2.0 + su) * h_op_norm * h_op_norm + hty_norm) +
         2.0 * su * lambda_r * std::pow(r_lower, -4) + 0.5 * su * lambda_theta * M;
}

double polar_varpi2(int M) { return 0.25 * M * M; }

CompositeProblem build_polar_problem(const Mat& H, const Vec& y, int M, const PolarParams& params) {
  require(params.r_lower > 0.0 && params.r_lower <= 1.0, "r_lower must lie in (0, 1]");
  require(params.lambda_r > 0.0 && params.lambda_theta > 0.0, "polar weights must be positive");
  require(H.rows() == y.size() && H.cols() % 2 == 0 && H.rows() % 2 == 0,
          "real-lifted H must be 2B x 2U and match y");
  require(M >= 2, "M must be >= 2");

  struct Data {
    Mat H;
    Vec y;
    int U;
    int M;
    double lambda_r;
  };
  const int U = static_cast<int>(H.cols() / 2);
  auto d = std::make_shared<const Data>(Data{H, y, U, M, params.lambda_r});

  CompositeProblem P;
  P.h.eval = [d](const Vec& x) {
    const auto r = x.head(d->U);
    const Vec s = polar_map(r, x.tail(d->U));
    return 0.5 * (d->y - d->H * s).squaredNorm() + d->lambda_r * r.cwiseInverse().sum();
  };
  P.h.grad = [d](const Vec& x) {
    const int U = d->U;
    const Vec r = x.head(U);
    const Vec sn = x.tail(U).array().sin();
    const Vec cs = x.tail(U).array().cos();
    Vec s(2 * U);
    s << r.cwiseProduct(sn), r.cwiseProduct(cs);
    const Vec w = d->H.transpose() * (d->H * s - d->y);
    const auto wt = w.head(U), wb = w.tail(U);
    Vec grad(2 * U);
    grad.head(U) = wt.cwiseProduct(sn) + wb.cwiseProduct(cs) -
                   d->lambda_r * r.array().square().inverse().matrix();
    grad.tail(U) = r.cwiseProduct(wt.cwiseProduct(cs) - wb.cwiseProduct(sn));
    return grad;
  };

  P.S.eval = [U, M](const Vec& x) {
    Vec z(U);
    for (int u = 0; u < U; ++u) z[u] = sin_half_multiple(M, x[U + u]);
    return z;
  };
  P.S.jac_apply = [U, M](const Vec& x, const Vec& v) {
    Vec z(U);
    for (int u = 0; u < U; ++u) z[u] = 0.5 * M * cos_half_multiple(M, x[U + u]) * v[U + u];
    return z;
  };
  P.S.jac_adjoint_apply = [U, M](const Vec& x, const Vec& w) {
    Vec out = Vec::Zero(2 * U);
    for (int u = 0; u < U; ++u) out[U + u] = 0.5 * M * cos_half_multiple(M, x[U + u]) * w[u];
    return out;
  };

  // The experiments run with eta = 1 so that mu_n = 0.5 n^(-1/3).
  P.g = l1_norm(params.lambda_theta, 1.0);

  Vec lo(2 * U), hi(2 * U);
  lo << Vec::Constant(U, params.r_lower), Vec::Constant(U, -std::numeric_limits<double>::infinity());
  hi << Vec::Ones(U), Vec::Constant(U, std::numeric_limits<double>::infinity());
  P.phi = box_indicator(lo, hi);

  const double op = Eigen::JacobiSVD<Mat>(H).singularValues()(0);
  P.varpi1 = polar_varpi1(U, op, (H.transpose() * y).norm(), params.lambda_r, params.lambda_theta,
                          params.r_lower, M);
  P.varpi2 = polar_varpi2(M);
  return P;
}

CompositeProblem build_polar_problem(const MimoInstance& instance, const PolarParams& params) {
  return build_polar_problem(realify_matrix(instance.H), realify_vector(instance.y), instance.M,
                             params);
}

Vec polar_initial_point(const Vec& s_real, double r_lower) {
  require(s_real.size() % 2 == 0, "real-lifted estimate must have even length");
  const Eigen::Index U = s_real.size() / 2;
  Vec x(2 * U);
  for (Eigen::Index u = 0; u < U; ++u) {
    const double re = s_real[u], im = s_real[U + u];
    x[u] = std::clamp(std::hypot(re, im), r_lower, 1.0);
    x[U + u] = std::atan2(re, im);
  }
  return x;
}

Vec polar_estimate(const Vec& x) {
  require(x.size() % 2 == 0, "polar point must have even length");
  const Eigen::Index U = x.size() / 2;
  return polar_map(x.head(U), x.tail(U));
}

std::vector<Vec> constellation_shifts(int U, int M) {
  require(U >= 1 && M >= 2, "need U >= 1 and M >= 2");
  std::vector<Vec> shifts;
  shifts.reserve(M);
  for (int m = 0; m < M; ++m) {
    Vec s(2 * U);
    s << Vec::Constant(U, std::cos(phase_of(m, M))), Vec::Constant(U, std::sin(phase_of(m, M)));
    shifts.push_back(std::move(s));
  }
  return shifts;
}

bool is_power_of_two(int M) { return M >= 2 && std::has_single_bit(static_cast<unsigned>(M)); }

std::vector<int> psk_demodulate(const Vec& s_real, int M) {
  if (!is_power_of_two(M)) throw ParameterError("PSK order must be a power of two");
  require(s_real.size() % 2 == 0, "real-lifted estimate must have even length");
  const Eigen::Index U = s_real.size() / 2;
  const double sector = 2.0 * kPi / M;
  constexpr double tie = 1e-12;
  std::vector<int> out(U);
  for (Eigen::Index u = 0; u < U; ++u) {
    const double phi = std::atan2(s_real[U + u], s_real[u]);
    int best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (int m = 0; m < M; ++m) {
      double d = std::abs(std::remainder(phi - m * sector, 2.0 * kPi));
      if (d < best_dist - tie) {
        best_dist = d;
        best = m;
      }
    }
    out[u] = best;
  }
  return out;
}

int gray_encode(int m) { return m ^ (m >> 1); }

double bit_error_rate(const std::vector<int>& est, const std::vector<int>& truth, int M) {
  if (est.size() != truth.size()) throw ParameterError("index vectors differ in length");
  if (!is_power_of_two(M)) throw ParameterError("PSK order must be a power of two");
  if (est.empty()) return 0.0;
  const int bits = std::countr_zero(static_cast<unsigned>(M));
  long errors = 0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    if (est[i] < 0 || est[i] >= M || truth[i] < 0 || truth[i] >= M)
      throw ParameterError("symbol index out of range");
    errors += std::popcount(static_cast<unsigned>(gray_encode(est[i]) ^ gray_encode(truth[i])));
  }
  return static_cast<double>(errors) / (static_cast<double>(est.size()) * bits);
}

// --- binary container --------------------------------------------------------

namespace {

template <class T>
void put(std::ostream& out, T v) {
  static_assert(sizeof(T) == 8);
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), 8);
}

template <class T>
T get(std::istream& in) {
  unsigned char buf[8];
  if (!in.read(reinterpret_cast<char*>(buf), 8)) throw ParameterError("truncated instance file");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  T v;
  std::memcpy(&v, &bits, 8);
  return v;
}

void put_complex(std::ostream& out, std::complex<double> z) {
  put(out, z.real());
  put(out, z.imag());
}

std::complex<double> get_complex(std::istream& in) {
  const double re = get<double>(in);
  return {re, get<double>(in)};
}

}  // namespace

void save_instance(std::ostream& out, const MimoInstance& inst) {
  out.write(kMagic, sizeof kMagic);
  put<std::int64_t>(out, inst.U);
  put<std::int64_t>(out, inst.B);
  put<std::int64_t>(out, inst.M);
  put(out, inst.snr_db);
  put(out, inst.sigma2);
  put(out, inst.seed);
  for (int b = 0; b < inst.B; ++b)
    for (int u = 0; u < inst.U; ++u) put_complex(out, inst.H(b, u));
  for (int m : inst.s_indices) put<std::int64_t>(out, m);
  for (int b = 0; b < inst.B; ++b) put_complex(out, inst.noise[b]);
  for (int b = 0; b < inst.B; ++b) put_complex(out, inst.y[b]);
  if (!out) throw std::runtime_error("failed to write instance");
}

MimoInstance load_instance(std::istream& in) {
  char magic[sizeof kMagic];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw ParameterError("not a MIMO instance file (bad magic)");
  MimoInstance inst;
  const auto U = get<std::int64_t>(in), B = get<std::int64_t>(in), M = get<std::int64_t>(in);
  if (U < 1 || B < 1 || M < 2 || U > (1 << 20) || B > (1 << 20) || M > (1 << 20))
    throw ParameterError("instance header out of range");
  inst.U = static_cast<int>(U);
  inst.B = static_cast<int>(B);
  inst.M = static_cast<int>(M);
  inst.snr_db = get<double>(in);
  inst.sigma2 = get<double>(in);
  inst.seed = get<std::uint64_t>(in);
  inst.H.resize(B, U);
  for (int b = 0; b < inst.B; ++b)
    for (int u = 0; u < inst.U; ++u) inst.H(b, u) = get_complex(in);
  inst.s_indices.resize(U);
  for (int& m : inst.s_indices) {
    m = static_cast<int>(get<std::int64_t>(in));
    if (m < 0 || m >= inst.M) throw ParameterError("symbol index out of range in instance file");
  }
  inst.noise.resize(B);
  for (int b = 0; b < inst.B; ++b) inst.noise[b] = get_complex(in);
  inst.y.resize(B);
  for (int b = 0; b < inst.B; ++b) inst.y[b] = get_complex(in);
  return inst;
}

void save_instance(const std::string& path, const MimoInstance& inst) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  save_instance(out, inst);
}

MimoInstance load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return load_instance(in);
}

}  // namespace pvs::mimo
