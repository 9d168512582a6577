#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace dhsic {

// Error taxonomy shared by all modules. Each condition gets its own type so
// callers (and the CLI exit-code mapping) can distinguish input problems from
// numeric failures.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateSample : Error    { using Error::Error; };
struct DimensionMismatch : Error   { using Error::Error; };
struct TooLarge : Error            { using Error::Error; };
struct SampleTooSmall : Error      { using Error::Error; };
struct DegenerateMoments : Error   { using Error::Error; };
struct NonConvergence : Error      { using Error::Error; };
struct UnsupportedData : Error     { using Error::Error; };
struct SingularSystem : Error      { using Error::Error; };
struct CholeskyFailure : Error     { using Error::Error; };
struct IndexOutOfRange : Error     { using Error::Error; };
struct ParseError : Error          { using Error::Error; };
struct GroupSpecError : Error      { using Error::Error; };
struct NonIntegerDiscrete : Error  { using Error::Error; };

enum class VarKind { Continuous, Discrete };

// An n x p value matrix whose columns are partitioned into d variables.
// Multivariate variables own several columns; each variable is tagged
// continuous or discrete (discrete columns must hold integer values).
struct Dataset {
  Eigen::MatrixXd values;                // n x p
  std::vector<std::vector<int>> groups;  // d disjoint 0-based column sets covering all p columns
  std::vector<VarKind> kinds;            // one tag per group

  int n() const { return static_cast<int>(values.rows()); }
  int p() const { return static_cast<int>(values.cols()); }
  int d() const { return static_cast<int>(groups.size()); }

  // Copy of the columns belonging to variable j, in group order.
  Eigen::MatrixXd group_block(int j) const;

  // Throws GroupSpecError / NonIntegerDiscrete if the invariants fail:
  // groups partition {0..p-1}, d >= 2, no empty group, discrete integrality.
  void validate() const;
};

// Convenience constructor: every column its own variable of the given kind.
Dataset make_univariate_dataset(const Eigen::MatrixXd& values,
                                VarKind kind = VarKind::Continuous);

}  // namespace dhsic
