#include "nmpc/alpha_table.hpp"

#include "nmpc/errors.hpp"

#include <cmath>
#include <string>

namespace nmpc {

namespace {

// log of prod_{i=first..last}(1 - 1/gamma_i); -inf if some gamma_i == 1.
double log_ratio(int first, int last, const ExpoControllability& ec) {
    double acc = 0.0;
    for (int i = first; i <= last; ++i) {
        const double g = gamma(i, ec);
        if (g <= 1.0) return -INFINITY;
        acc += std::log1p(-1.0 / g);
    }
    return acc;
}

// r / (1 - r) with r = exp(log_r)
double odds(double log_r) {
    if (log_r == -INFINITY) return 0.0;
    return std::exp(log_r) / -std::expm1(log_r);
}

}  // namespace

ExpoControllability::ExpoControllability(double C, double sigma) : C_(C), sigma_(sigma) {
    if (!(C >= 1.0)) throw InputError("controllability constant C must be >= 1, got " + std::to_string(C));
    if (!(sigma > 0.0 && sigma < 1.0)) {
        throw InputError("decay rate sigma must lie in (0, 1), got " + std::to_string(sigma));
    }
}

double gamma(int i, const ExpoControllability& ec) {
    if (i < 1) throw InputError("gamma index must be >= 1");
    return ec.C() * -std::expm1(i * std::log(ec.sigma())) / (1.0 - ec.sigma());
}

double alpha_nm(int N, int m, const ExpoControllability& ec) {
    if (N < 2) throw InputError("horizon N must be >= 2");
    if (m < 1 || m > N - 1) throw InputError("control horizon m must lie in [1, N - 1]");
    return 1.0 - odds(log_ratio(m + 1, N, ec)) * odds(log_ratio(N - m + 1, N, ec));
}

int min_horizon(double alpha_bar, const ControlHorizonPolicy& policy, const ExpoControllability& ec, int scan_cap) {
    if (!(alpha_bar > 0.0 && alpha_bar < 1.0)) throw InputError("alpha_bar must lie in (0, 1)");
    if (const auto* fixed = std::get_if<FixedControlHorizon>(&policy); fixed && fixed->m < 1) {
        throw InputError("fixed control horizon m must be >= 1");
    }
    for (int N = 2; N <= scan_cap; ++N) {
        int m = 1;
        if (const auto* fixed = std::get_if<FixedControlHorizon>(&policy)) {
            m = fixed->m;
            if (m > N - 1) continue;
        } else {
            m = N / 2;
        }
        if (alpha_nm(N, m, ec) >= alpha_bar) return N;
    }
    throw NotFoundError("no horizon up to " + std::to_string(scan_cap) + " reaches alpha_bar = " +
                        std::to_string(alpha_bar));
}

}  // namespace nmpc
