#include "spikemon/series.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace spikemon {

void EigenSeries::validate() const {
    if (m < 1) throw std::invalid_argument("EigenSeries: training length m must be >= 1");
    if (n < 1) throw std::invalid_argument("EigenSeries: matrix dimension n must be >= 1");
    if (lambdas.size() < static_cast<std::size_t>(m))
        throw std::invalid_argument("EigenSeries: need at least m = " + std::to_string(m) +
                                    " values, have " + std::to_string(lambdas.size()));
    for (double v : lambdas)
        if (!std::isfinite(v)) throw std::invalid_argument("EigenSeries: values must be finite");
}

}  // namespace spikemon
