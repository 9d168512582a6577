#include "dhsic/dataset.hpp"

#include <cmath>

namespace dhsic {

Eigen::MatrixXd Dataset::group_block(int j) const {
  if (j < 0 || j >= d()) throw IndexOutOfRange("group index out of range");
  const auto& cols = groups[static_cast<std::size_t>(j)];
  Eigen::MatrixXd block(values.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    block.col(static_cast<Eigen::Index>(c)) = values.col(cols[c]);
  }
  return block;
}

void Dataset::validate() const {
  if (groups.size() < 2) throw GroupSpecError("need at least d = 2 variables");
  if (kinds.size() != groups.size())
    throw GroupSpecError("one kind tag per group required");
  std::vector<int> seen(static_cast<std::size_t>(p()), 0);
  for (const auto& g : groups) {
    if (g.empty()) throw GroupSpecError("empty variable group");
    for (int c : g) {
      if (c < 0 || c >= p()) throw GroupSpecError("group column index out of range");
      if (seen[static_cast<std::size_t>(c)]++)
        throw GroupSpecError("overlapping variable groups");
    }
  }
  for (int c = 0; c < p(); ++c) {
    if (!seen[static_cast<std::size_t>(c)])
      throw GroupSpecError("column " + std::to_string(c + 1) + " not covered by any group");
  }
  for (std::size_t j = 0; j < groups.size(); ++j) {
    if (kinds[j] != VarKind::Discrete) continue;
    for (int c : groups[j]) {
      for (Eigen::Index i = 0; i < values.rows(); ++i) {
        const double v = values(i, c);
        if (!std::isfinite(v) || v != std::floor(v))
          throw NonIntegerDiscrete("discrete group contains non-integer value");
      }
    }
  }
}

Dataset make_univariate_dataset(const Eigen::MatrixXd& values, VarKind kind) {
  Dataset ds;
  ds.values = values;
  ds.groups.resize(static_cast<std::size_t>(values.cols()));
  for (Eigen::Index c = 0; c < values.cols(); ++c)
    ds.groups[static_cast<std::size_t>(c)] = {static_cast<int>(c)};
  ds.kinds.assign(static_cast<std::size_t>(values.cols()), kind);
  return ds;
}

}  // namespace dhsic
