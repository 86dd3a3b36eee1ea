#include <gtest/gtest.h>

#include <map>

#include "led/rng.hpp"

using namespace led;

TEST(Rng, SplitMixReferenceSequence) {
    std::uint64_t s = 0;
    EXPECT_EQ(splitmix64(s), 0xe220a8397b1dcdafULL);
    EXPECT_EQ(splitmix64(s), 0x6e789e6aa1b965f4ULL);
    EXPECT_EQ(splitmix64(s), 0x06c45d188009454fULL);
}

// Pinned so that a change to seeding or the generator shows up here before
// it silently changes every corpus.
TEST(Rng, PinnedStream) {
    Rng r(42);
    EXPECT_EQ(r.next(), 0x15780b2e0c2ec716ULL);
    EXPECT_EQ(r.next(), 0x6104d9866d113a7eULL);
    EXPECT_EQ(r.next(), 0xae17533239e499a1ULL);
    EXPECT_EQ(derive_seed(7, "doc-a"), 13340940676328271577ULL);
    EXPECT_EQ(derive_seed(7, std::uint64_t{3}), 391212348954035431ULL);
}

TEST(Rng, SameSeedSameStream) {
    Rng a(9), b(9), c(10);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next();
        EXPECT_EQ(x, b.next());
        differs |= x != c.next();
    }
    EXPECT_TRUE(differs);
}

TEST(Rng, Ranges) {
    Rng r(1);
    for (int i = 0; i < 10000; ++i) {
        const double u = r.uniform();
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
        const auto k = r.between(-3, 3);
        EXPECT_GE(k, -3);
        EXPECT_LE(k, 3);
        EXPECT_LT(r.below(7), 7u);
    }
}

TEST(Rng, CategoricalFollowsWeights) {
    Rng r(2);
    const std::vector<double> w{0.7, 0.0, 0.3};
    std::map<std::size_t, int> n;
    for (int i = 0; i < 20000; ++i) ++n[r.categorical(w)];
    EXPECT_EQ(n[1], 0);
    EXPECT_NEAR(n[0] / 20000.0, 0.7, 0.015);
}

TEST(Rng, ShuffleIsPermutation) {
    Rng r(3);
    std::vector<int> v{1, 2, 3, 4, 5, 6, 7, 8};
    auto sorted = v;
    r.shuffle(v);
    std::sort(v.begin(), v.end());
    EXPECT_EQ(v, sorted);
}

TEST(Rng, DerivedSeedsDiffer) {
    EXPECT_NE(derive_seed(1, "a"), derive_seed(1, "b"));
    EXPECT_NE(derive_seed(1, "a"), derive_seed(2, "a"));
    EXPECT_NE(derive_seed(1, std::uint64_t{0}), derive_seed(1, std::uint64_t{1}));
}
