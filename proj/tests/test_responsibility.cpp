#include "doctest.h"

#include <atomic>
#include <bit>

#include "mpskit/responsibility.hpp"
#include "test_helpers.hpp"

using namespace mpskit;

namespace {

// Direct evaluation of the responsibility definition over all 16 subsets.
std::array<float, 4> brute_responsibility(const std::array<bool, 16>& outcomes) {
    std::array<float, 4> r{};
    for (int p = 0; p < 4; ++p) {
        float best = 0.f;
        for (unsigned s = 0; s < 16; ++s) {
            if (!((s >> p) & 1u)) continue;
            if (outcomes[s] && !outcomes[s & ~(1u << p)]) {
                best = std::max(best, 1.f / static_cast<float>(std::popcount(s)));
            }
        }
        r[p] = best;
    }
    return r;
}

class CountingOracle final : public Oracle {
public:
    explicit CountingOracle(OracleHandle inner) : inner_(std::move(inner)) {}

    const std::string& model_id() const override { return inner_->model_id(); }
    const std::string& architecture_tag() const override { return inner_->architecture_tag(); }
    int input_height() const override { return inner_->input_height(); }
    int input_width() const override { return inner_->input_width(); }
    int input_channels() const override { return inner_->input_channels(); }
    int class_count() const override { return inner_->class_count(); }
    Classification classify(const ImageTensor& image) const override {
        ++calls;
        return inner_->classify(image);
    }

    mutable std::atomic<long long> calls{0};

private:
    OracleHandle inner_;
};

class SerialOnly final : public Oracle {
public:
    explicit SerialOnly(OracleHandle inner) : inner_(std::move(inner)) {}
    const std::string& model_id() const override { return inner_->model_id(); }
    const std::string& architecture_tag() const override { return inner_->architecture_tag(); }
    int input_height() const override { return inner_->input_height(); }
    int input_width() const override { return inner_->input_width(); }
    int input_channels() const override { return inner_->input_channels(); }
    int class_count() const override { return inner_->class_count(); }
    bool thread_safe() const override { return false; }
    Classification classify(const ImageTensor& image) const override {
        return inner_->classify(image);
    }

private:
    OracleHandle inner_;
};

PassTable table_from(const std::array<bool, 16>& outcomes) {
    PassTable table;
    table.partition = split_region(Region{0, 0, 4, 4}, PixelCoord{2, 2});
    table.outcomes = outcomes;
    return table;
}

}  // namespace

TEST_CASE("part_responsibility matches brute force on random tables") {
    Rng rng(20240816);
    for (int trial = 0; trial < 2000; ++trial) {
        std::array<bool, 16> outcomes{};
        const unsigned bits = static_cast<unsigned>(uniform_below(rng, 1u << 16));
        for (int i = 0; i < 16; ++i) outcomes[i] = (bits >> i) & 1u;
        const PassTable table = table_from(outcomes);
        CHECK(part_responsibility(table) == brute_responsibility(outcomes));
    }
}

TEST_CASE("part_responsibility on hand-built tables") {
    SUBCASE("passes iff part 0 retained") {
        std::array<bool, 16> outcomes{};
        for (unsigned s = 0; s < 16; ++s) outcomes[s] = (s & 1u) != 0;
        CHECK(part_responsibility(table_from(outcomes)) ==
              std::array<float, 4>{1.f, 0.f, 0.f, 0.f});
    }
    SUBCASE("passes iff at least three parts retained") {
        std::array<bool, 16> outcomes{};
        for (unsigned s = 0; s < 16; ++s) outcomes[s] = std::popcount(s) >= 3;
        CHECK(part_responsibility(table_from(outcomes)) ==
              std::array<float, 4>{1 / 3.f, 1 / 3.f, 1 / 3.f, 1 / 3.f});
    }
    SUBCASE("passes only for the full set") {
        std::array<bool, 16> outcomes{};
        outcomes[15] = true;
        CHECK(part_responsibility(table_from(outcomes)) ==
              std::array<float, 4>{0.25f, 0.25f, 0.25f, 0.25f});
    }
    SUBCASE("values always in the admissible set") {
        Rng rng(7);
        for (int trial = 0; trial < 200; ++trial) {
            std::array<bool, 16> outcomes{};
            for (auto& o : outcomes) o = uniform_below(rng, 2) == 1;
            for (float v : part_responsibility(table_from(outcomes))) {
                const bool admissible =
                    v == 0.f || v == 1.f || v == 0.5f || v == 1 / 3.f || v == 0.25f;
                CHECK(admissible);
            }
        }
    }
}

TEST_CASE("minimal_passing_subsets returns exactly the minimal passing sets") {
    Rng rng(99);
    for (int trial = 0; trial < 500; ++trial) {
        std::array<bool, 16> outcomes{};
        for (auto& o : outcomes) o = uniform_below(rng, 3) == 0;
        const std::vector<unsigned> minimal = minimal_passing_subsets(outcomes);

        for (std::size_t i = 1; i < minimal.size(); ++i) CHECK(minimal[i - 1] < minimal[i]);
        for (unsigned m : minimal) {
            CHECK(outcomes[m]);
            for (unsigned s = 0; s < 16; ++s) {
                if (s != m && (s & m) == s) CHECK_FALSE(outcomes[s]);
            }
        }
        // Every passing set contains some minimal passing subset.
        for (unsigned s = 0; s < 16; ++s) {
            if (!outcomes[s]) continue;
            bool covered = false;
            for (unsigned m : minimal) covered = covered || (m & s) == m;
            CHECK(covered);
        }
    }
    std::array<bool, 16> empty_passes{};
    empty_passes[0] = true;
    empty_passes[5] = true;
    CHECK(minimal_passing_subsets(empty_passes) == std::vector<unsigned>{0});
}

TEST_CASE("evaluate_partition consumes 16 calls and matches the oracle per subset") {
    // Key pixel placed inside part 2 (below-left quadrant).
    const auto inner = make_synthetic_oracle(testutil::key_oracle_spec(8, 8, {{6, 1}}));
    const auto counting = std::make_shared<CountingOracle>(inner);
    const ImageTensor image = testutil::random_image(8, 8, 1, 8, 0.5f, 1.f);
    const Partition partition = split_region(Region{0, 0, 8, 8}, PixelCoord{4, 4});
    CHECK(partition.parts[2].contains(6, 1));

    const PixelMask carrier(8, 8, true);
    const PassTable table = evaluate_partition(image, carrier, partition, *counting, 1, {});
    CHECK(counting->calls == 16);
    for (unsigned b = 0; b < 16; ++b) {
        CHECK(table.outcomes[b] == ((b >> 2) & 1u));
    }
}

TEST_CASE("constant oracles accumulate nothing") {
    SyntheticOracleSpec spec;
    spec.kind = SyntheticKind::linear;
    spec.input_height = 8;
    spec.input_width = 8;
    spec.linear_class_count = 2;
    spec.weights.assign(2 * 64, 0.f);  // scores always zero -> constant class 0
    const OracleHandle oracle = make_synthetic_oracle(spec);
    const ImageTensor image = testutil::random_image(8, 8, 1, 3);

    SearchConfig config;
    config.iterations = 3;
    config.mutant_budget = 300;
    SearchStats stats;
    const ResponsibilityLandscape landscape = build_landscape(image, *oracle, config, {}, 1, &stats);
    // The empty mutant already passes, so the only minimal subset is empty.
    for (float v : landscape.scores) CHECK(v == 0.f);
    CHECK(landscape.iterations_completed == 3);
}

TEST_CASE("landscape is deterministic and worker-count independent") {
    const OracleHandle oracle =
        make_synthetic_oracle(testutil::key_oracle_spec(16, 16, {{2, 3}, {9, 12}}));
    const ImageTensor image = testutil::random_image(16, 16, 1, 5, 0.5f, 1.f);
    SearchConfig config;
    config.iterations = 8;
    config.mutant_budget = 1600;
    config.seed = 424242;

    const ResponsibilityLandscape a = build_landscape(image, *oracle, config, {}, 1);
    const ResponsibilityLandscape b = build_landscape(image, *oracle, config, {}, 1);
    const ResponsibilityLandscape c = build_landscape(image, *oracle, config, {}, 4);
    CHECK(a.scores == b.scores);
    CHECK(a.scores == c.scores);

    const auto serial_only = std::make_shared<SerialOnly>(oracle);
    const ResponsibilityLandscape d = build_landscape(image, *serial_only, config, {}, 4);
    CHECK(a.scores == d.scores);

    SearchConfig reseeded = config;
    reseeded.seed = 424243;
    const ResponsibilityLandscape f = build_landscape(image, *oracle, reseeded, {}, 1);
    CHECK(a.scores != f.scores);
}

TEST_CASE("key pixel is the strict landscape maximum") {
    const OracleHandle oracle =
        make_synthetic_oracle(testutil::key_oracle_spec(16, 16, {{2, 3}}));
    const ImageTensor image = testutil::random_image(16, 16, 1, 77, 0.5f, 1.f);
    SearchConfig config;  // defaults: 20 iterations, 4000 budget
    const ResponsibilityLandscape landscape = build_landscape(image, *oracle, config, {});
    const float key_score = landscape.at(2, 3);
    CHECK(key_score > 0.f);
    for (int y = 0; y < 16; ++y) {
        for (int x = 0; x < 16; ++x) {
            if (y == 2 && x == 3) continue;
            CHECK(landscape.at(y, x) < key_score);
        }
    }
    for (float v : landscape.scores) {
        CHECK(v >= 0.f);
        CHECK(std::isfinite(v));
    }
}

TEST_CASE("budget is respected and sliced per iteration") {
    const auto inner = make_synthetic_oracle(testutil::key_oracle_spec(16, 16, {{6, 11}}));
    const ImageTensor image = testutil::random_image(16, 16, 1, 13, 0.5f, 1.f);

    SUBCASE("slice of 16 evaluates exactly the root partition per iteration") {
        const auto counting = std::make_shared<CountingOracle>(inner);
        SearchConfig config;
        config.iterations = 2;
        config.mutant_budget = 32;  // slice 16 per iteration
        SearchStats stats;
        build_landscape(image, *counting, config, {}, 1, &stats);
        CHECK(stats.oracle_calls == 1 + 2 * 16);
        CHECK(stats.truncated_branches >= 2);  // every refinement is cut short
    }
    SUBCASE("total calls never exceed budget plus the initial classification") {
        for (long long budget : {48ll, 160ll, 4000ll}) {
            const auto counting = std::make_shared<CountingOracle>(inner);
            SearchConfig config;
            config.iterations = 4;
            config.mutant_budget = budget;
            SearchStats stats;
            build_landscape(image, *counting, config, {}, 1, &stats);
            CHECK(stats.oracle_calls == counting->calls.load());
            CHECK(stats.oracle_calls <= budget + 1);
            CHECK((stats.oracle_calls - 1) % 16 == 0);
        }
    }
}

TEST_CASE("search config validation") {
    SearchConfig config;
    CHECK_NOTHROW(config.validate());
    SearchConfig bad = config;
    bad.iterations = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = config;
    bad.mutant_budget = 15;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = config;
    bad.min_side = 1;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = config;
    bad.max_depth = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("landscape save and load round-trip") {
    testutil::TempDir dir("land_rt");
    const OracleHandle oracle =
        make_synthetic_oracle(testutil::key_oracle_spec(12, 10, {{3, 3}}));
    const ImageTensor image = testutil::random_image(12, 10, 1, 21, 0.5f, 1.f);
    SearchConfig config;
    config.iterations = 4;
    config.mutant_budget = 640;
    const ResponsibilityLandscape landscape = build_landscape(image, *oracle, config, {});

    const auto path = dir.path() / "scores.bin";
    save_landscape(landscape, config, path);
    CHECK(std::filesystem::exists(dir.path() / "scores.bin.json"));
    const ResponsibilityLandscape back = load_landscape(path);
    CHECK(back.height == landscape.height);
    CHECK(back.width == landscape.width);
    CHECK(back.iterations_completed == landscape.iterations_completed);
    CHECK(back.scores == landscape.scores);
}
