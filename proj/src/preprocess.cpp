#include "inkpark/preprocess.hpp"

#include <cmath>

#include "json.hpp"

namespace inkpark {

ZScoreParams fit_zscore(const Matrix& train, std::vector<std::string> names) {
  if (train.rows() < 2) throw PreprocessError("fit_zscore needs at least 2 rows");
  if (!names.empty() && names.size() != train.cols())
    throw PreprocessError("fit_zscore: name count does not match column count");
  ZScoreParams p;
  p.names = std::move(names);
  const std::size_t n = train.rows(), m = train.cols();
  p.mean.assign(m, 0.0);
  p.std.assign(m, 0.0);
  p.constant.assign(m, false);
  for (std::size_t c = 0; c < m; ++c) {
    // Two passes; the second centred sum keeps the variance accurate.
    double sum = 0;
    for (std::size_t r = 0; r < n; ++r) sum += train(r, c);
    const double mu = sum / static_cast<double>(n);
    double ss = 0;
    bool all_equal = true;
    for (std::size_t r = 0; r < n; ++r) {
      const double d = train(r, c) - mu;
      ss += d * d;
      if (train(r, c) != train(0, c)) all_equal = false;
    }
    p.mean[c] = all_equal ? train(0, c) : mu;
    p.std[c] = all_equal ? 0.0 : std::sqrt(ss / static_cast<double>(n));
    p.constant[c] = p.std[c] == 0.0;
  }
  return p;
}

Matrix apply_zscore(const Matrix& m, const ZScoreParams& params) {
  if (m.cols() != params.size())
    throw PreprocessError("apply_zscore: matrix has " + std::to_string(m.cols()) +
                          " columns, params have " + std::to_string(params.size()));
  Matrix out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c)
      out(r, c) = params.constant[c] ? 0.0 : (m(r, c) - params.mean[c]) / params.std[c];
  return out;
}

std::string format_zscore_json(const ZScoreParams& params) {
  nlohmann::json doc{{"names", params.names},
                     {"mean", params.mean},
                     {"std", params.std},
                     {"constant", params.constant}};
  return doc.dump(2) + "\n";
}

ZScoreParams parse_zscore_json(std::string_view text) {
  try {
    const auto doc = nlohmann::json::parse(text);
    ZScoreParams p;
    p.names = doc.at("names").get<std::vector<std::string>>();
    p.mean = doc.at("mean").get<std::vector<double>>();
    p.std = doc.at("std").get<std::vector<double>>();
    p.constant = doc.at("constant").get<std::vector<bool>>();
    if (p.std.size() != p.mean.size() || p.constant.size() != p.mean.size() ||
        (!p.names.empty() && p.names.size() != p.mean.size()))
      throw PreprocessError("z-score params: array lengths differ");
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw PreprocessError(std::string("z-score params: ") + e.what());
  }
}

}  // namespace inkpark
