// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "vantage/rpgo/rpgo.hpp"

namespace vantage::rpgo {

/// g2o text format: VERTEX_SE3:QUAT and EDGE_SE3:QUAT records with the upper
/// triangle of the 6x6 information matrix. The file follows g2o's
/// translation-first tangent ordering; blocks are permuted on the way in and
/// out of the library's rotation-first convention. Edges between consecutive
/// node ids load as odometry, all others as loop edges (kind recovered from
/// the structure of the translation information block).
void save_g2o(const PoseGraph& graph, const std::string& path);
PoseGraph load_g2o(const std::string& path);

}  // namespace vantage::rpgo
