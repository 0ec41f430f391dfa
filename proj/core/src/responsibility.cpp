#include "mpskit/responsibility.hpp"

#include <atomic>
#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "mpskit/errors.hpp"

namespace mpskit {

void SearchConfig::validate() const {
    if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
    if (max_depth < 1) throw std::invalid_argument("max_depth must be >= 1");
    if (min_side < 2) throw std::invalid_argument("min_side must be >= 2");
    if (mutant_budget < 16) throw std::invalid_argument("mutant_budget must be >= 16");
}

PassTable evaluate_partition(const ImageTensor& image, const PixelMask& carrier,
                             const Partition& partition, const Oracle& oracle, int target_class,
                             const BaselineSpec& baseline) {
    PassTable table;
    table.partition = partition;
    for (unsigned b = 0; b < 16; ++b) {
        const PixelMask mask = mutant_mask(SubsetMutant{partition, b}, carrier);
        const Classification result = oracle.classify(composite(image, mask, baseline));
        table.outcomes[b] = result.class_index == target_class;
    }
    return table;
}

std::array<float, 4> part_responsibility(const PassTable& table) {
    std::array<float, 4> r{0.f, 0.f, 0.f, 0.f};
    for (int p = 0; p < 4; ++p) {
        const unsigned bit = 1u << p;
        for (unsigned set = 0; set < 16; ++set) {
            if (!(set & bit)) continue;
            if (!table.outcomes[set] || table.outcomes[set & ~bit]) continue;
            const float share = 1.f / static_cast<float>(std::popcount(set));
            if (share > r[static_cast<std::size_t>(p)]) r[static_cast<std::size_t>(p)] = share;
        }
    }
    return r;
}

std::vector<unsigned> minimal_passing_subsets(const std::array<bool, 16>& outcomes) {
    std::vector<unsigned> minimal;
    for (unsigned b = 0; b < 16; ++b) {
        if (!outcomes[b]) continue;
        bool has_passing_proper_subset = false;
        // Proper submask walk, including 0 for b != 0.
        for (unsigned s = (b - 1) & b;; s = (s - 1) & b) {
            if (b != 0 && outcomes[s]) {
                has_passing_proper_subset = true;
                break;
            }
            if (s == 0) break;
        }
        if (!has_passing_proper_subset) minimal.push_back(b);
    }
    return minimal;
}

namespace {

struct SearchContext {
    const ImageTensor& image;
    const Oracle& oracle;
    int target_class;
    const SearchConfig& config;
    const BaselineSpec& baseline;
    Rng& rng;
    long long remaining;
    std::vector<double>& accumulator;
    SearchStats stats;
};

void add_to_part(std::vector<double>& acc, int image_width, const Region& part, double value) {
    for (int y = part.top; y < part.top + part.height; ++y) {
        double* row = acc.data() + static_cast<std::size_t>(y) * image_width;
        for (int x = part.left; x < part.left + part.width; ++x) row[x] += value;
    }
}

bool splittable(const Region& region, int min_side) {
    return region.height >= min_side && region.width >= min_side;
}

// Depth-first refinement. Budget is charged per partition (16 mutants);
// a branch that cannot afford one is counted as truncated and dropped.
void search_region(SearchContext& ctx, const Region& region, int depth) {
    if (ctx.remaining < 16) {
        ++ctx.stats.truncated_branches;
        return;
    }
    const Partition partition = split_region(region, draw_split_point(region, ctx.rng));
    PixelMask carrier(ctx.image.height, ctx.image.width, false);
    carrier.fill_region(region, true);
    const PassTable table = evaluate_partition(ctx.image, carrier, partition, ctx.oracle,
                                               ctx.target_class, ctx.baseline);
    ctx.remaining -= 16;
    ctx.stats.oracle_calls += 16;

    const std::array<float, 4> r = part_responsibility(table);
    const std::vector<unsigned> minimal = minimal_passing_subsets(table.outcomes);
    unsigned recurse_bits = 0;
    for (unsigned subset : minimal) {
        recurse_bits |= subset;
        for (int p = 0; p < 4; ++p) {
            if (subset & (1u << p)) {
                add_to_part(ctx.accumulator, ctx.image.width, partition.parts[static_cast<std::size_t>(p)],
                            static_cast<double>(r[static_cast<std::size_t>(p)]));
            }
        }
    }
    if (depth >= ctx.config.max_depth) return;
    for (int p = 0; p < 4; ++p) {
        if (!(recurse_bits & (1u << p))) continue;
        const Region& part = partition.parts[static_cast<std::size_t>(p)];
        if (!splittable(part, ctx.config.min_side)) continue;
        search_region(ctx, part, depth + 1);
    }
}

}  // namespace

SearchStats refine_and_accumulate(const ImageTensor& image, const Oracle& oracle, int target_class,
                                  const SearchConfig& config, const BaselineSpec& baseline,
                                  Rng& rng, long long budget_slice,
                                  std::vector<double>& accumulator) {
    config.validate();
    if (accumulator.size() != image.pixel_count()) {
        throw std::invalid_argument("accumulator size does not match image");
    }
    SearchContext ctx{image, oracle, target_class, config, baseline, rng, budget_slice,
                      accumulator, SearchStats{}};
    const Region full{0, 0, image.height, image.width};
    if (splittable(full, config.min_side)) search_region(ctx, full, 1);
    return ctx.stats;
}

ResponsibilityLandscape build_landscape(const ImageTensor& image, const Oracle& oracle,
                                        const SearchConfig& config, const BaselineSpec& baseline,
                                        int workers, SearchStats* stats) {
    config.validate();
    image.validate();
    const int target_class = oracle.classify(image).class_index;
    const std::size_t cells = image.pixel_count();
    const long long slice = config.mutant_budget / config.iterations;
    const int n = config.iterations;

    std::vector<std::vector<double>> per_iteration(static_cast<std::size_t>(n));
    std::vector<SearchStats> per_stats(static_cast<std::size_t>(n));

    auto run_iteration = [&](int i) {
        Rng rng(hash_seed(config.seed, static_cast<std::uint64_t>(i)));
        per_iteration[static_cast<std::size_t>(i)].assign(cells, 0.0);
        per_stats[static_cast<std::size_t>(i)] =
            refine_and_accumulate(image, oracle, target_class, config, baseline, rng, slice,
                                  per_iteration[static_cast<std::size_t>(i)]);
    };

    const int effective_workers =
        oracle.thread_safe() ? std::min(workers, n) : 1;
    if (effective_workers > 1) {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(effective_workers));
        for (int w = 0; w < effective_workers; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    const int i = next.fetch_add(1);
                    if (i >= n) return;
                    run_iteration(i);
                }
            });
        }
        for (std::thread& t : pool) t.join();
    } else {
        for (int i = 0; i < n; ++i) run_iteration(i);
    }

    // Ascending-index reduction keeps float results worker-count independent.
    std::vector<double> total(cells, 0.0);
    SearchStats combined;
    combined.oracle_calls = 1;  // the initial classification
    for (int i = 0; i < n; ++i) {
        const std::vector<double>& acc = per_iteration[static_cast<std::size_t>(i)];
        for (std::size_t k = 0; k < cells; ++k) total[k] += acc[k];
        combined.oracle_calls += per_stats[static_cast<std::size_t>(i)].oracle_calls;
        combined.truncated_branches += per_stats[static_cast<std::size_t>(i)].truncated_branches;
    }

    ResponsibilityLandscape landscape;
    landscape.height = image.height;
    landscape.width = image.width;
    landscape.iterations_completed = n;
    landscape.scores.resize(cells);
    for (std::size_t k = 0; k < cells; ++k) {
        landscape.scores[k] = static_cast<float>(total[k] / n);
    }
    if (stats) *stats = combined;
    return landscape;
}

namespace {

void put_u32_le(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

std::uint32_t get_u32_le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

void save_landscape(const ResponsibilityLandscape& landscape, const SearchConfig& config,
                    const std::filesystem::path& path) {
    std::string blob;
    blob.reserve(8 + landscape.scores.size() * 4);
    put_u32_le(blob, static_cast<std::uint32_t>(landscape.height));
    put_u32_le(blob, static_cast<std::uint32_t>(landscape.width));
    for (float v : landscape.scores) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        put_u32_le(blob, bits);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write landscape '" + path.string() + "'");
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!out) throw DataError("short write on landscape '" + path.string() + "'");
    out.close();

    nlohmann::json sidecar{
        {"iterations_completed", landscape.iterations_completed},
        {"config",
         {{"iterations", config.iterations},
          {"max_depth", config.max_depth},
          {"min_side", config.min_side},
          {"mutant_budget", config.mutant_budget},
          {"seed", config.seed}}},
    };
    std::filesystem::path side = path;
    side += ".json";
    std::ofstream meta(side, std::ios::binary | std::ios::trunc);
    if (!meta) throw DataError("cannot write landscape sidecar '" + side.string() + "'");
    meta << sidecar.dump(2) << "\n";
}

ResponsibilityLandscape load_landscape(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open landscape '" + path.string() + "'");
    std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (blob.size() < 8) throw DataError("landscape '" + path.string() + "' is truncated");
    const unsigned char* p = reinterpret_cast<const unsigned char*>(blob.data());
    ResponsibilityLandscape landscape;
    landscape.height = static_cast<int>(get_u32_le(p));
    landscape.width = static_cast<int>(get_u32_le(p + 4));
    const std::size_t cells =
        static_cast<std::size_t>(landscape.height) * static_cast<std::size_t>(landscape.width);
    if (blob.size() != 8 + cells * 4) {
        throw DataError("landscape '" + path.string() + "' has wrong payload size");
    }
    landscape.scores.resize(cells);
    for (std::size_t k = 0; k < cells; ++k) {
        const std::uint32_t bits = get_u32_le(p + 8 + k * 4);
        float v;
        std::memcpy(&v, &bits, 4);
        landscape.scores[k] = v;
    }
    std::filesystem::path side = path;
    side += ".json";
    if (std::filesystem::exists(side)) {
        std::ifstream meta(side, std::ios::binary);
        try {
            nlohmann::json doc = nlohmann::json::parse(meta);
            landscape.iterations_completed = doc.at("iterations_completed").get<int>();
        } catch (const nlohmann::json::exception& e) {
            throw DataError("landscape sidecar '" + side.string() + "': " + e.what());
        }
    }
    return landscape;
}

}  // namespace mpskit
