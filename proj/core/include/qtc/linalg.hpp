#ifndef QTC_LINALG_HPP
#define QTC_LINALG_HPP

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace qtc {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Default entrywise absolute tolerance for operator comparisons.
inline constexpr double kDefaultTol = 1e-10;

/// Largest total Hilbert-space dimension handled by the dense routines.
inline constexpr int kMaxDim = 64;

/// Unit vector on the Bloch sphere; parametrizes a dichotomic qubit
/// observable n.sigma with eigenvalues +-1.
struct BlochDirection {
  double x = 0.0;
  double y = 0.0;
  double z = 1.0;

  BlochDirection() = default;
  BlochDirection(double x_, double y_, double z_);

  /// Direction in the X-Z plane at angle theta from the Z axis:
  /// (sin theta, 0, cos theta).
  static BlochDirection from_planar_angle(double theta);

  double dot(const BlochDirection& other) const;

  /// Angle from the Z axis in the X-Z plane, atan2(x, z). Only meaningful
  /// for planar directions (y == 0).
  double planar_angle() const;
};

Matrix identity(int dim);
const Matrix& pauli_x();
const Matrix& pauli_y();
const Matrix& pauli_z();

Vector ket_z_plus();
Vector ket_z_minus();
Vector ket_x_plus();
Vector ket_x_minus();
Vector ket_y_plus();
Vector ket_y_minus();

Matrix dagger(const Matrix& a);

/// Rank-1 projector |v><v| onto a (not necessarily normalized) state.
Matrix projector(const Vector& state);

double max_abs_diff(const Matrix& a, const Matrix& b);
bool approx_equal(const Matrix& a, const Matrix& b, double tol = kDefaultTol);
bool is_hermitian(const Matrix& a, double tol = kDefaultTol);
bool is_unitary(const Matrix& a, double tol = kDefaultTol);
bool is_normalized(const Vector& v, double tol = 1e-10);
bool all_finite(const Matrix& a);

/// Kronecker product; dimensions multiply.
Matrix kron(const Matrix& a, const Matrix& b);

/// The observable n.sigma for a unit Bloch direction. Hermitian with
/// eigenvalues +-1. Throws std::invalid_argument for non-unit directions.
Matrix observable_from_bloch(const BlochDirection& n);

struct EigenProjector {
  double eigenvalue;
  Matrix projector;
};

/// Spectral decomposition of a Hermitian observable into rank-1 projectors,
/// sorted by descending eigenvalue. Rejects non-Hermitian input and spectra
/// with eigenvalues closer than 1e-8 ("degenerate spectrum").
std::vector<EigenProjector> dichotomic_projectors(const Matrix& a);

/// Deterministic random source for sampling states and unitaries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double gaussian() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// Haar-distributed pure state: complex Gaussian entries, normalized.
Vector random_state(int dim, Rng& rng);

/// Haar-distributed unitary via QR of a complex Gaussian matrix.
Matrix random_unitary(int dim, Rng& rng);

/// Random density matrix: mixture of dim Haar states with uniform simplex
/// weights. Hermitian, PSD, trace 1.
Matrix random_density(int dim, Rng& rng);

Matrix random_hermitian(int dim, Rng& rng);

}  // namespace qtc

#endif  // QTC_LINALG_HPP
