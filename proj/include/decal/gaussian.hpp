#pragma once

namespace decal {

double normal_pdf(double z);
double normal_cdf(double z);
/// Inverse standard-normal CDF; level in (0, 1).
double normal_quantile(double level);

} // namespace decal
