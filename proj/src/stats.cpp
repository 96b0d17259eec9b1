#include "csm/stats.hpp"

namespace csm {

RunningStats reduce_pairwise(std::span<const RunningStats> blocks) {
  if (blocks.empty()) return {};
  if (blocks.size() == 1) return blocks.front();
  const std::size_t half = blocks.size() / 2;
  RunningStats left = reduce_pairwise(blocks.first(half));
  left.merge(reduce_pairwise(blocks.subspan(half)));
  return left;
}

MCEstimate summarize(std::span<const double> values) {
  std::vector<RunningStats> blocks((values.size() + kReductionBlock - 1) / kReductionBlock);
  for (std::size_t i = 0; i < values.size(); ++i) blocks[i / kReductionBlock].add(values[i]);
  return reduce_pairwise(blocks).estimate();
}

}  // namespace csm
