#include "doctest.h"

#include <map>
#include <stdexcept>

#include "mpskit/occlusion.hpp"
#include "mpskit/rng.hpp"
#include "test_helpers.hpp"

using namespace mpskit;

TEST_CASE("splitmix64 matches the published reference sequence for seed 0") {
    std::uint64_t state = 0;
    CHECK(splitmix64(state) == 0xE220A8397B1DCDAFull);
    CHECK(splitmix64(state) == 0x6E789E6AA1B965F4ull);
    CHECK(splitmix64(state) == 0x06C45D188009454Full);
}

TEST_CASE("hash_seed separates streams and is reproducible") {
    CHECK(hash_seed(42, 0) == hash_seed(42, 0));
    CHECK(hash_seed(42, 0) != hash_seed(42, 1));
    CHECK(hash_seed(42, 0) != hash_seed(43, 0));
}

TEST_CASE("uniform_below stays in range and is close to uniform") {
    Rng rng(2024);
    std::map<std::uint64_t, int> counts;
    constexpr int kDraws = 10000;
    for (int i = 0; i < kDraws; ++i) {
        const std::uint64_t v = uniform_below(rng, 7);
        REQUIRE(v < 7);
        ++counts[v];
    }
    // Binomial(10^4, 1/7): mean ~1428.6, sigma ~35.0; accept mean +- 3 sigma.
    for (std::uint64_t v = 0; v < 7; ++v) {
        CHECK(counts[v] >= 1323);
        CHECK(counts[v] <= 1534);
    }
}

TEST_CASE("uniform_unit lies in [0, 1)") {
    Rng rng(5);
    for (int i = 0; i < 1000; ++i) {
        const double u = uniform_unit(rng);
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("split_region produces a disjoint 4-part cover") {
    const Region parent{2, 3, 6, 8};
    const Partition partition = split_region(parent, PixelCoord{5, 7});
    CHECK(partition.parent == parent);
    long long total = 0;
    for (const Region& part : partition.parts) {
        CHECK(part.height > 0);
        CHECK(part.width > 0);
        total += part.area();
    }
    CHECK(total == parent.area());
    for (int y = parent.top; y < parent.top + parent.height; ++y) {
        for (int x = parent.left; x < parent.left + parent.width; ++x) {
            int owners = 0;
            for (const Region& part : partition.parts) owners += part.contains(y, x) ? 1 : 0;
            CHECK(owners == 1);
        }
    }
    // The split point's row and column begin the below/right quadrants.
    CHECK(partition.parts[3].top == 5);
    CHECK(partition.parts[3].left == 7);
}

TEST_CASE("split_region rejects edge and out-of-range split points") {
    const Region parent{0, 0, 4, 4};
    CHECK_THROWS_AS(split_region(parent, PixelCoord{0, 2}), std::invalid_argument);
    CHECK_THROWS_AS(split_region(parent, PixelCoord{2, 0}), std::invalid_argument);
    CHECK_THROWS_AS(split_region(parent, PixelCoord{4, 2}), std::invalid_argument);
    CHECK_THROWS_AS(split_region(Region{0, 0, 1, 4}, PixelCoord{0, 2}), std::invalid_argument);
}

TEST_CASE("draw_split_point is uniform over the interior grid") {
    const Region parent{0, 0, 4, 4};  // interior points: y,x in {1,2,3} -> 9 cells
    Rng rng(31337);
    std::map<std::pair<int, int>, int> counts;
    constexpr int kDraws = 10000;
    for (int i = 0; i < kDraws; ++i) {
        const PixelCoord p = draw_split_point(parent, rng);
        REQUIRE(p.y >= 1);
        REQUIRE(p.y <= 3);
        REQUIRE(p.x >= 1);
        REQUIRE(p.x <= 3);
        ++counts[{p.y, p.x}];
    }
    CHECK(counts.size() == 9);
    // Binomial(10^4, 1/9): mean ~1111.1, sigma ~31.4; accept mean +- 3 sigma.
    for (const auto& [cell, count] : counts) {
        (void)cell;
        CHECK(count >= 1017);
        CHECK(count <= 1206);
    }
}

TEST_CASE("composite keeps masked pixels and substitutes the baseline elsewhere") {
    const ImageTensor image = testutil::random_image(4, 5, 3, 99);
    PixelMask mask(4, 5);
    mask.set(1, 2, true);
    mask.set(3, 4, true);

    SUBCASE("per-channel baseline") {
        const BaselineSpec baseline{{0.1f, 0.2f, 0.3f}};
        const ImageTensor out = composite(image, mask, baseline);
        for (int y = 0; y < 4; ++y) {
            for (int x = 0; x < 5; ++x) {
                for (int c = 0; c < 3; ++c) {
                    const float expected =
                        mask.at(y, x) ? image.at(y, x, c) : baseline.values[c];
                    CHECK(out.at(y, x, c) == expected);
                }
            }
        }
    }
    SUBCASE("scalar baseline broadcasts, empty baseline means zero") {
        CHECK(composite(image, mask, BaselineSpec{{0.5f}}).at(0, 0, 2) == 0.5f);
        CHECK(composite(image, mask, BaselineSpec{}).at(0, 0, 1) == 0.f);
        CHECK(composite(image, mask, BaselineSpec{}).at(1, 2, 1) == image.at(1, 2, 1));
    }
}

TEST_CASE("mutant_mask restricts the carrier to retained parts inside the parent") {
    const Region parent{1, 1, 4, 4};
    const Partition partition = split_region(parent, PixelCoord{3, 3});
    PixelMask carrier(6, 6);
    carrier.fill_region(parent, true);
    carrier.set(0, 0, true);  // outside the parent: must be copied through

    const PixelMask out = mutant_mask(SubsetMutant{partition, 0b0001u}, carrier);
    CHECK(out.at(0, 0));
    for (int y = 0; y < 6; ++y) {
        for (int x = 0; x < 6; ++x) {
            if (y == 0 && x == 0) continue;
            const bool inside_part0 = partition.parts[0].contains(y, x);
            CHECK(out.at(y, x) == (carrier.at(y, x) && inside_part0));
        }
    }

    // Retaining everything inside the parent reproduces the carrier.
    CHECK(mutant_mask(SubsetMutant{partition, 0b1111u}, carrier) == carrier);
    // Retaining nothing clears the parent but keeps the outside.
    const PixelMask none = mutant_mask(SubsetMutant{partition, 0u}, carrier);
    CHECK(none.at(0, 0));
    CHECK(none.area() == 1);
}

TEST_CASE("enumerate_subsets yields the 16 bitmasks in ascending order") {
    const Partition partition = split_region(Region{0, 0, 4, 4}, PixelCoord{2, 2});
    const std::vector<SubsetMutant> subsets = enumerate_subsets(partition);
    REQUIRE(subsets.size() == 16);
    for (unsigned b = 0; b < 16; ++b) {
        CHECK(subsets[b].retained == b);
        CHECK(subsets[b].partition.parent == partition.parent);
    }
}
