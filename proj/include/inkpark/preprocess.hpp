#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "inkpark/matrix.hpp"

namespace inkpark {

class PreprocessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-column population mean and std. Holds no reference to the data it was
/// fitted on.
struct ZScoreParams {
  std::vector<std::string> names;
  std::vector<double> mean;
  std::vector<double> std;
  std::vector<bool> constant;  // std == 0

  std::size_t size() const { return mean.size(); }
  friend bool operator==(const ZScoreParams&, const ZScoreParams&) = default;
};

/// Needs at least 2 rows. `names` may be empty or one per column.
ZScoreParams fit_zscore(const Matrix& train, std::vector<std::string> names = {});

/// (x - mean) / std; constant columns map to 0.
Matrix apply_zscore(const Matrix& m, const ZScoreParams& params);

std::string format_zscore_json(const ZScoreParams& params);
ZScoreParams parse_zscore_json(std::string_view text);

}  // namespace inkpark
