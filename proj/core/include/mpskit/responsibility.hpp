#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "mpskit/image.hpp"
#include "mpskit/mask.hpp"
#include "mpskit/occlusion.hpp"
#include "mpskit/oracle.hpp"
#include "mpskit/rng.hpp"

namespace mpskit {

// Outcomes of the 16 occlusion mutants of one partition, indexed by
// retained-part bitmask (bit i set = part i kept). outcomes[15] is the
// full-carrier mutant.
struct PassTable {
    Partition partition;
    std::array<bool, 16> outcomes{};
};

// Per-pixel nonnegative scores accumulated over search iterations.
struct ResponsibilityLandscape {
    int height = 0;
    int width = 0;
    std::vector<float> scores;  // row-major, height * width
    int iterations_completed = 0;

    float at(int y, int x) const {
        return scores[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                      static_cast<std::size_t>(x)];
    }
};

struct SearchConfig {
    int iterations = 20;
    int max_depth = 10;
    int min_side = 2;
    long long mutant_budget = 4000;  // mutant oracle calls per image, split evenly per iteration
    std::uint64_t seed = 0;

    void validate() const;  // throws std::invalid_argument
};

struct SearchStats {
    long long oracle_calls = 0;        // mutant evaluations plus the initial classification
    long long truncated_branches = 0;  // refinements abandoned for lack of budget
};

// Classifies all 16 subset mutants of one partition. Consumes exactly 16
// oracle calls; the caller guards the budget.
PassTable evaluate_partition(const ImageTensor& image, const PixelMask& carrier,
                             const Partition& partition, const Oracle& oracle, int target_class,
                             const BaselineSpec& baseline);

// r(p) = max 1/|S| over retained sets S containing p where S passes and
// S minus {p} fails; 0 when no such set. Values lie in {0, 1, 1/2, 1/3, 1/4}.
std::array<float, 4> part_responsibility(const PassTable& table);

// Passing bitmasks with no passing proper subset, ascending. If the empty
// mutant passes it is the unique minimal subset.
std::vector<unsigned> minimal_passing_subsets(const std::array<bool, 16>& outcomes);

// One search iteration: draws a root partition of the full image, then
// refines depth-first. For every minimal passing subset each retained part's
// responsibility is added to all of the part's pixels; each such part is then
// re-searched alone (carrier = that part) until depth, size, or the budget
// slice stops it. Accumulates into `accumulator` (height * width doubles).
SearchStats refine_and_accumulate(const ImageTensor& image, const Oracle& oracle, int target_class,
                                  const SearchConfig& config, const BaselineSpec& baseline,
                                  Rng& rng, long long budget_slice,
                                  std::vector<double>& accumulator);

// Mean of `config.iterations` independent iterations, seed_i derived from
// config.seed. Bit-identical for any worker count; workers > 1 requires a
// thread-safe oracle (otherwise iterations run serially).
ResponsibilityLandscape build_landscape(const ImageTensor& image, const Oracle& oracle,
                                        const SearchConfig& config, const BaselineSpec& baseline,
                                        int workers = 1, SearchStats* stats = nullptr);

// Flat binary persistence: 8-byte header (height, width as 32-bit LE
// unsigned) then row-major 32-bit LE floats, plus "<path>.json" sidecar with
// the search config and iterations_completed.
void save_landscape(const ResponsibilityLandscape& landscape, const SearchConfig& config,
                    const std::filesystem::path& path);
ResponsibilityLandscape load_landscape(const std::filesystem::path& path);

}  // namespace mpskit
