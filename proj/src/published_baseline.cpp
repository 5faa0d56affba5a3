#include <array>

#include "wqst/eval.hpp"

namespace wqst {

namespace {

// Rows LM, RF, GP, SVM, GAM, gradient boosting. Columns per indicator
// (pH, DO, SC, WT) as S-T, V-D pairs.
constexpr std::array<std::array<double, 8>, 6> kRmse = {{
    {0.548, 0.498, 1.989, 1.913, 1285.151, 405.445, 5.086, 4.516},
    {0.408, 0.378, 1.362, 1.452, 631.505, 257.467, 1.918, 1.859},
    {0.446, 0.465, 1.483, 1.856, 733.691, 346.392, 2.234, 2.757},
    {0.495, 0.428, 1.718, 1.649, 1273.048, 380.100, 2.524, 2.221},
    {0.478, 0.432, 1.686, 1.715, 961.122, 348.542, 2.445, 2.306},
    {0.402, 0.376, 1.355, 1.380, 601.385, 247.900, 1.838, 1.738},
}};

constexpr std::array<std::array<double, 8>, 6> kR2 = {{
    {0.085, 0.207, 0.059, 0.230, 0.051, 0.210, 0.161, 0.339},
    {0.493, 0.542, 0.559, 0.557, 0.771, 0.682, 0.881, 0.900},
    {0.393, 0.309, 0.476, 0.275, 0.691, 0.425, 0.838, 0.757},
    {0.254, 0.415, 0.298, 0.428, 0.068, 0.306, 0.793, 0.842},
    {0.302, 0.402, 0.324, 0.381, 0.469, 0.417, 0.806, 0.830},
    {0.507, 0.548, 0.563, 0.599, 0.792, 0.705, 0.890, 0.903},
}};

}  // namespace

std::optional<double> published_baseline(ModelKind model, Indicator ind, RegimeKind regime, Metric metric) {
  std::size_t row = 0;
  switch (model) {
    case ModelKind::LINEAR: row = 0; break;
    case ModelKind::RANDOM_FOREST: row = 1; break;
    case ModelKind::GAUSSIAN_PROCESS: row = 2; break;
    case ModelKind::SUPPORT_VECTOR: row = 3; break;
    case ModelKind::ADDITIVE: row = 4; break;
    case ModelKind::GRADIENT_BOOSTING: row = 5; break;
  }
  const std::size_t col =
      2 * static_cast<std::size_t>(ind) + (regime == RegimeKind::VARIABLE_DEPENDENT ? 1 : 0);
  return metric == Metric::RMSE ? kRmse[row][col] : kR2[row][col];
}

}  // namespace wqst
