#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace bode {

// Correspondence between the threshold schedule and powering-up: the number
// of designs needed before the sum of the largest normalized u(d)^J values
// strictly exceeds alpha. Powers are taken in log space so large J stays
// finite.
inline std::size_t powering_correspondence(const std::vector<double>& expected_utils, int j_power,
                                           double alpha) {
    if (expected_utils.empty()) throw std::domain_error("powering: no utilities");
    if (j_power < 1) throw std::domain_error("powering: J must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("powering: alpha must be in (0,1)");

    std::vector<double> logs(expected_utils.size());
    for (std::size_t i = 0; i < expected_utils.size(); ++i) {
        if (!(expected_utils[i] > 0.0))
            throw std::domain_error("powering: utilities must be positive");
        logs[i] = j_power * std::log(expected_utils[i]);
    }
    const double mx = *std::max_element(logs.begin(), logs.end());
    double total = 0.0;
    for (auto& l : logs) {
        l = std::exp(l - mx);
        total += l;
    }
    std::sort(logs.begin(), logs.end(), std::greater<>());

    double cum = 0.0;
    const double target = alpha * total;
    for (std::size_t count = 1; count <= logs.size(); ++count) {
        cum += logs[count - 1];
        if (cum > target) return count;
    }
    return logs.size();
}

}  // namespace bode
