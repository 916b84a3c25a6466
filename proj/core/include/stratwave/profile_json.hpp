#pragma once

#include <nlohmann/json.hpp>

#include "stratwave/profiles.hpp"

namespace stratwave {

// Keys: p0, g, d, sigma, rho {kind: constant|linear|exp|table}, bernoulli
// {kind: zero|constant|sqrt_singular|table_B}. Optional: samples, rho_prime_l1,
// rho_floor, decreasing, r_exponent. Throws ConfigError.
PhysicalParameters parse_parameters(const nlohmann::json& j);
StratificationProfile parse_profile(const nlohmann::json& j);

}  // namespace stratwave
