#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cnv {

using cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Maximum number of complex entries a single dense operator may hold.
// Default 2^28; overridable via the CNV_MAX_ENTRIES environment variable.
std::int64_t capacity_cap();
void check_capacity(std::int64_t entries, const std::string& what);

struct SpaceLabel {
  std::string id;
  int dim = 1;
};

// Complex matrix tagged with an ordered list of tensor factors.
// Basis index of |i_0 i_1 ...> is row-major: the first factor is most significant.
struct DenseOperator {
  std::vector<SpaceLabel> factors;
  Mat m;

  DenseOperator() = default;
  DenseOperator(std::vector<SpaceLabel> f, Mat mat);

  std::vector<int> dims() const;
  int dim() const { return static_cast<int>(m.rows()); }
};

std::int64_t product(const std::vector<int>& dims);

DenseOperator kron(const DenseOperator& a, const DenseOperator& b);
Mat kron(const Mat& a, const Mat& b);

// Acts as `op` on the listed factor positions (in the listed order), identity elsewhere.
Mat embed(const Mat& op, const std::vector<int>& positions, const std::vector<int>& dims);
DenseOperator embed(const DenseOperator& op, const std::vector<int>& positions,
                    const std::vector<SpaceLabel>& chain);

// embed(op, positions, dims) * x and x * embed(op, positions, dims) without forming the embedding.
Mat apply_embedded(const Mat& op, const std::vector<int>& positions, const std::vector<int>& dims, const Mat& x);
Mat apply_embedded_right(const Mat& x, const Mat& op, const std::vector<int>& positions,
                         const std::vector<int>& dims);

Mat partial_trace(const Mat& op, const std::vector<int>& dims, int k);
Mat partial_transpose(const Mat& op, const std::vector<int>& dims, int k);
DenseOperator partial_trace(const DenseOperator& op, int k);
DenseOperator partial_transpose(const DenseOperator& op, int k);

// Permutation matrix exchanging two tensor factors of dims (d1, d2) -> (d2, d1).
Mat swap_factors(int d1, int d2);

struct RankResult {
  int rank = 0;
  Mat isometry;  // orthonormal basis of the column space
  Eigen::VectorXd singular_values;
};
RankResult svd_rank(const Mat& op, double threshold);

// Sine of the largest principal angle between two subspaces (columns need not be orthonormal).
double subspace_distance(const Mat& a, const Mat& b);
Mat orthonormalize(const Mat& a);

double rel_diff(const Mat& a, const Mat& b);
double rel_diff(cd a, cd b);

struct EigenPairs {
  Vec values;
  Mat vectors;
};
EigenPairs eig(const Mat& op);

struct SimultaneousBasis {
  Mat vectors;                   // columns: common eigenvectors
  std::vector<Vec> eigenvalues;  // one vector of eigenvalues per input operator
  double max_residual = 0.0;
  int degenerate_clusters = 0;
  int attempts = 0;
};
// Diagonalizes a random complex combination and validates each operator's residual.
SimultaneousBasis simultaneous_eigbasis(const std::vector<Mat>& ops, std::uint64_t seed, double tol = 1e-8);

// Polynomial reconstruction in a centred and scaled variable t = (u - center) / scale.
struct PolynomialFit {
  int degree = 0;
  std::vector<cd> coefficients;  // monomial coefficients in u, lowest first
  double residual = 0.0;         // max relative held-out residual (0 if none held out)
  cd center{0.0, 0.0};
  double scale = 1.0;
  std::vector<cd> scaled;        // coefficients in t, lowest first

  cd operator()(cd u) const;
  cd leading() const { return coefficients.back(); }
};

PolynomialFit fit_polynomial(const std::vector<cd>& u, const std::vector<cd>& values, int degree);
// Fits on the first degree+1 samples and reports the max relative residual on the rest.
PolynomialFit fit_polynomial_heldout(const std::vector<cd>& u, const std::vector<cd>& values, int degree);

// Entrywise fit of a matrix-valued polynomial sampled at nodes.
struct MatrixPolynomial {
  int degree = 0;
  std::vector<Mat> coefficients;  // in u, lowest first
  Mat operator()(cd u) const;
  const Mat& leading() const { return coefficients.back(); }
};
MatrixPolynomial fit_matrix_polynomial(const std::vector<cd>& u, const std::vector<Mat>& values, int degree);

// Interpolates a matrix function known to be polynomial of the given degree on degree+1 Chebyshev nodes
// of [lo, hi] + i*offset; `heldout` receives the max relative error at two extra nodes.
MatrixPolynomial interpolate_matrix(const std::function<Mat(cd)>& f, int degree, double lo, double hi, double offset,
                                    double* heldout = nullptr);

// Chebyshev points of the first kind mapped to [lo, hi] and shifted by i*offset.
std::vector<cd> chebyshev_nodes(int count, double lo, double hi, double offset = 0.0);

// count points on the circle |u - center| = radius, rotated off the real axis.
std::vector<cd> circle_nodes(int count, cd center, double radius);

}  // namespace cnv
