#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "mocalc/fracops.hpp"

namespace mocalc {

enum class Suite { Gamma, Beta, Semigroup, Inverse, Mixed, Reduction, Equivariance, All };

std::string to_string(Suite s);
Suite suite_from_string(const std::string& s);

struct CheckResult {
  std::string suite;
  std::string check;
  int trial = 0;
  Eigen::Index dim = 1;
  double residual = 0.0;
  double threshold = 0.0;
  /// Matrices the check ran on (matcore JSON), for reproduction.
  nlohmann::json inputs = nlohmann::json::object();

  bool passed() const { return residual <= threshold; }
};

struct VerifyReport {
  std::string suite;
  std::uint64_t seed = 0;
  int trials = 0;
  std::vector<CheckResult> results;

  bool passed() const;
  /// Deterministic for a given (suite, trials, seed): no timings, no host data.
  nlohmann::json to_json() const;
};

/// Seeded matrices for the identity checks. The seed matrix has entries
/// uniform in [-1, 1] and is shifted and scaled so the real parts of its
/// eigenvalues land in [lo, hi]; partners are quadratic polynomials in it,
/// mapped into their own window. Draws with eigenvector condition above 1e3
/// are discarded.
class MatrixSampler {
 public:
  explicit MatrixSampler(std::uint64_t seed) : rng_(seed) {}

  ComplexMatrix seed_matrix(Eigen::Index n, double lo, double hi);
  ComplexMatrix partner(const ComplexMatrix& seed, double lo, double hi);
  /// Well-conditioned similarity transform.
  ComplexMatrix similarity(Eigen::Index n);
  double uniform(double lo, double hi);

 private:
  std::mt19937_64 rng_;
  ComplexMatrix into_window(const ComplexMatrix& a, double lo, double hi);
};

/// Runs `suite` with `trials` seeded trials. Thresholds are the acceptance
/// thresholds of each identity.
VerifyReport run_verify(Suite suite, int trials, std::uint64_t seed, const OperatorConfig& cfg = {});

}  // namespace mocalc
