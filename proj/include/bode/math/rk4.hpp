#pragma once

#include <cmath>
#include <stdexcept>

namespace bode {

// Classical fixed-step RK4 over [0, dt_total]; the final partial step is
// shortened to land exactly on dt_total. State needs s + s and s * scalar.
template <typename State, typename Rhs>
State rk4_integrate(State s, double dt_total, double h, Rhs&& rhs) {
    if (dt_total < 0.0) throw std::domain_error("rk4: negative interval");
    if (!(h > 0.0)) throw std::domain_error("rk4: step must be > 0");
    double t = 0.0;
    while (t < dt_total - 1e-12) {
        const double hh = std::min(h, dt_total - t);
        const State k1 = rhs(s);
        const State k2 = rhs(s + k1 * (0.5 * hh));
        const State k3 = rhs(s + k2 * (0.5 * hh));
        const State k4 = rhs(s + k3 * hh);
        s = s + (k1 + (k2 + k3) * 2.0 + k4) * (hh / 6.0);
        t += hh;
    }
    return s;
}

}  // namespace bode
