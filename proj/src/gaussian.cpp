#include "decal/gaussian.hpp"

#include "decal/error.hpp"

#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <numbers>

namespace decal {

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_quantile(double level)
{
    if (!(level > 0.0 && level < 1.0)) throw InputError("normal quantile level must lie in (0, 1)");
    return boost::math::quantile(boost::math::normal_distribution<double>(), level);
}

} // namespace decal
