#pragma once

#include <optional>
#include <variant>

namespace nmpc {

/// Exponential controllability: stage costs along some control decay like C sigma^n.
class ExpoControllability {
public:
    /// Throws InputError unless C >= 1 and 0 < sigma < 1.
    ExpoControllability(double C, double sigma);

    double C() const noexcept { return C_; }
    double sigma() const noexcept { return sigma_; }

private:
    double C_;
    double sigma_;
};

/// gamma_i = C (1 - sigma^i) / (1 - sigma), i >= 1.
double gamma(int i, const ExpoControllability& ec);

/**
 * A priori suboptimality degree alpha_{N,m} when m controls of the horizon-N
 * solution are applied:
 *
 *   alpha = 1 - prod_{m+1..N}(g_i - 1) prod_{N-m+1..N}(g_i - 1)
 *             / ([prod_{m+1..N} g_i - prod_{m+1..N}(g_i - 1)] [prod_{N-m+1..N} g_i - prod_{N-m+1..N}(g_i - 1)])
 *
 * Evaluated through the ratios r = prod(1 - 1/g_i) so that no product
 * overflows, whatever N.
 */
double alpha_nm(int N, int m, const ExpoControllability& ec);

struct FixedControlHorizon {
    int m = 1;
};
struct HalfHorizon {};  ///< m = floor(N / 2)
using ControlHorizonPolicy = std::variant<FixedControlHorizon, HalfHorizon>;

/// Smallest N >= 2 with alpha_nm(N, policy(N)) >= alpha_bar; NotFoundError past `scan_cap`.
int min_horizon(double alpha_bar, const ControlHorizonPolicy& policy, const ExpoControllability& ec,
                int scan_cap = 1000);

}  // namespace nmpc
