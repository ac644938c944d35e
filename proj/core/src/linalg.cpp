#include "qtc/linalg.hpp"

#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/KroneckerProduct>

namespace qtc {

namespace {
constexpr Complex kI{0.0, 1.0};
}  // namespace

BlochDirection::BlochDirection(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {
  const double n2 = x * x + y * y + z * z;
  if (std::abs(n2 - 1.0) > 1e-12) {
    throw std::invalid_argument("BlochDirection: not a unit vector");
  }
}

BlochDirection BlochDirection::from_planar_angle(double theta) {
  return BlochDirection(std::sin(theta), 0.0, std::cos(theta));
}

double BlochDirection::dot(const BlochDirection& other) const {
  return x * other.x + y * other.y + z * other.z;
}

double BlochDirection::planar_angle() const { return std::atan2(x, z); }

Matrix identity(int dim) { return Matrix::Identity(dim, dim); }

const Matrix& pauli_x() {
  static const Matrix m = (Matrix(2, 2) << 0, 1, 1, 0).finished();
  return m;
}

const Matrix& pauli_y() {
  static const Matrix m = (Matrix(2, 2) << 0, -kI, kI, 0).finished();
  return m;
}

const Matrix& pauli_z() {
  static const Matrix m = (Matrix(2, 2) << 1, 0, 0, -1).finished();
  return m;
}

Vector ket_z_plus() { return (Vector(2) << 1, 0).finished(); }
Vector ket_z_minus() { return (Vector(2) << 0, 1).finished(); }

Vector ket_x_plus() {
  const double s = 1.0 / std::sqrt(2.0);
  return (Vector(2) << s, s).finished();
}

Vector ket_x_minus() {
  const double s = 1.0 / std::sqrt(2.0);
  return (Vector(2) << s, -s).finished();
}

Vector ket_y_plus() {
  const double s = 1.0 / std::sqrt(2.0);
  return (Vector(2) << s, s * kI).finished();
}

Vector ket_y_minus() {
  const double s = 1.0 / std::sqrt(2.0);
  return (Vector(2) << s, -s * kI).finished();
}

Matrix dagger(const Matrix& a) { return a.adjoint(); }

Matrix projector(const Vector& state) {
  const double n2 = state.squaredNorm();
  if (n2 <= 0.0) {
    throw std::invalid_argument("projector: zero state");
  }
  return state * state.adjoint() / n2;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    return std::numeric_limits<double>::infinity();
  }
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff();
}

bool approx_equal(const Matrix& a, const Matrix& b, double tol) {
  return max_abs_diff(a, b) <= tol;
}

bool is_hermitian(const Matrix& a, double tol) {
  return a.rows() == a.cols() && approx_equal(a, a.adjoint(), tol);
}

bool is_unitary(const Matrix& a, double tol) {
  return a.rows() == a.cols() &&
         approx_equal(a.adjoint() * a, Matrix::Identity(a.rows(), a.cols()), tol);
}

bool is_normalized(const Vector& v, double tol) {
  return std::abs(v.squaredNorm() - 1.0) <= tol;
}

bool all_finite(const Matrix& a) { return a.allFinite(); }

Matrix kron(const Matrix& a, const Matrix& b) {
  return Eigen::kroneckerProduct(a, b).eval();
}

Matrix observable_from_bloch(const BlochDirection& n) {
  const double n2 = n.x * n.x + n.y * n.y + n.z * n.z;
  if (std::abs(n2 - 1.0) > 1e-12) {
    throw std::invalid_argument("observable_from_bloch: direction is not unit-norm");
  }
  return n.x * pauli_x() + n.y * pauli_y() + n.z * pauli_z();
}

std::vector<EigenProjector> dichotomic_projectors(const Matrix& a) {
  if (!is_hermitian(a)) {
    throw std::invalid_argument("dichotomic_projectors: observable is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("dichotomic_projectors: eigendecomposition failed");
  }
  const Eigen::VectorXd evals = solver.eigenvalues();
  for (int i = 0; i + 1 < evals.size(); ++i) {
    if (std::abs(evals(i + 1) - evals(i)) < 1e-8) {
      throw std::invalid_argument("dichotomic_projectors: degenerate spectrum");
    }
  }
  std::vector<EigenProjector> out;
  out.reserve(static_cast<std::size_t>(evals.size()));
  // SelfAdjointEigenSolver sorts ascending; emit descending so the +1
  // branch of a dichotomic observable comes first.
  for (int i = static_cast<int>(evals.size()) - 1; i >= 0; --i) {
    const Vector v = solver.eigenvectors().col(i);
    out.push_back({evals(i), v * v.adjoint()});
  }
  return out;
}

Vector random_state(int dim, Rng& rng) {
  Vector v(dim);
  for (int i = 0; i < dim; ++i) {
    v(i) = Complex(rng.gaussian(), rng.gaussian());
  }
  const double n = v.norm();
  if (n == 0.0) return random_state(dim, rng);
  return v / n;
}

Matrix random_unitary(int dim, Rng& rng) {
  Matrix g(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      g(i, j) = Complex(rng.gaussian(), rng.gaussian());
    }
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fix the phase ambiguity of QR so the distribution is Haar.
  for (int i = 0; i < dim; ++i) {
    const Complex d = r(i, i);
    q.col(i) *= (std::abs(d) > 0.0) ? d / std::abs(d) : Complex(1.0, 0.0);
  }
  return q;
}

Matrix random_density(int dim, Rng& rng) {
  std::vector<double> w(static_cast<std::size_t>(dim));
  double total = 0.0;
  for (auto& wi : w) {
    wi = -std::log(1.0 - rng.uniform());
    total += wi;
  }
  Matrix rho = Matrix::Zero(dim, dim);
  for (const double wi : w) {
    const Vector v = random_state(dim, rng);
    rho += (wi / total) * (v * v.adjoint());
  }
  return rho;
}

Matrix random_hermitian(int dim, Rng& rng) {
  Matrix g(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      g(i, j) = Complex(rng.gaussian(), rng.gaussian());
    }
  }
  return (g + g.adjoint()) / 2.0;
}

}  // namespace qtc
