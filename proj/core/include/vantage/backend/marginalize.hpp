// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "vantage/backend/optimizer.hpp"

namespace vantage::backend {

/// Dense Schur-complement marginalization of `exiting` pose states.
///
/// Considers every factor in `factors` that touches an exiting state; the
/// non-exiting pose states those factors reach form the boundary. Returns a
/// Gaussian prior over the boundary states that reproduces the eliminated
/// factors' normal equations at the current linearization point.
///
/// Projection factors must not reach exiting states (the smoother drops or
/// retires landmark observations first); this throws std::logic_error if one
/// does.
MarginalPriorFactor marginalize(const std::vector<Factor>& factors, const Values& values,
                                const std::vector<StateId>& exiting);

}  // namespace vantage::backend
