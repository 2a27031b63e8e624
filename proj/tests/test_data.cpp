#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "qdre/data.hpp"
#include "qdre/errors.hpp"

using namespace qdre;

namespace {

SignedMixtureSpec unit_variance_spec() {
    SignedMixtureSpec spec;
    spec.reference.components = {{{0.0}, {4.0}, 1.0}};
    spec.target.components = {{{1.0}, {1.0}, 1.3}, {{-1.0}, {1.0}, -0.3}};
    return spec;
}

SignedMixtureSpec benchmark_spec() {
    SignedMixtureSpec spec;
    spec.reference.components = {{{0.0}, {4.0}, 1.0}};
    spec.target.components = {{{1.0}, {0.64}, 1.3}, {{-1.0}, {0.64}, -0.3}};
    return spec;
}

}  // namespace

TEST(Dataset, AddValidatesAndDropsZeroWeights) {
    Dataset d(2);
    EXPECT_TRUE(d.add({{1.0, 2.0}, 0.5, 0}));
    EXPECT_FALSE(d.add({{1.0, 2.0}, 0.0, 1}));
    EXPECT_EQ(d.size(), 1u);
    EXPECT_THROW(d.add({{1.0}, 1.0, 0}), DataError);
    EXPECT_THROW(d.add({{1.0, NAN}, 1.0, 0}), DataError);
    EXPECT_THROW(d.add({{1.0, 2.0}, INFINITY, 0}), DataError);
    EXPECT_THROW(d.add({{1.0, 2.0}, 1.0, 2}), DataError);
}

TEST(Dataset, SumsSelectAndBalance) {
    Dataset d(1);
    d.add({{0.0}, 1.0, 0});
    d.add({{1.0}, 3.0, 0});
    d.add({{2.0}, 2.0, 1});
    d.add({{3.0}, -1.0, 1});
    EXPECT_DOUBLE_EQ(d.weight_sum(0), 4.0);
    EXPECT_DOUBLE_EQ(d.weight_sum(1), 1.0);
    EXPECT_DOUBLE_EQ(d.abs_weight_sum(), 7.0);
    EXPECT_EQ(d.select(1, -1).size(), 1u);
    EXPECT_EQ(d.select(1, +1).size(), 1u);
    EXPECT_EQ(d.select(0).size(), 2u);
    EXPECT_FALSE(d.is_balanced());
    d.balance_classes();
    EXPECT_TRUE(d.is_balanced());
    EXPECT_DOUBLE_EQ(d.weight_sum(1), 4.0);
    EXPECT_DOUBLE_EQ(d[3].weight, -4.0);

    Dataset no_target(1);
    no_target.add({{0.0}, 1.0, 0});
    EXPECT_THROW(no_target.balance_classes(), DataError);
}

TEST(MixtureSpec, Validation) {
    auto spec = unit_variance_spec();
    EXPECT_NO_THROW(spec.validate());
    spec.target.components[0].coefficient = 1.2;
    EXPECT_THROW(spec.validate(), ConfigError);
    spec = unit_variance_spec();
    spec.reference.components = {{{0.0}, {1.0}, 1.5}, {{0.0}, {1.0}, -0.5}};
    EXPECT_THROW(spec.validate(), ConfigError);
    spec = unit_variance_spec();
    spec.target.components[1].variance = {0.0};
    EXPECT_THROW(spec.validate(), ConfigError);
    spec = unit_variance_spec();
    spec.target.components[1].mean = {0.0, 1.0};
    EXPECT_THROW(spec.validate(), ConfigError);
}

TEST(MixtureSpec, JsonRoundTripAndSchemaErrors) {
    const auto spec = benchmark_spec();
    const nlohmann::json j = spec;
    EXPECT_EQ(j.get<SignedMixtureSpec>(), spec);
    auto bad = j;
    bad["target"][1].erase("coefficient");
    try {
        (void)bad.get<SignedMixtureSpec>();
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("target[1].coefficient"), std::string::npos) << e.what();
    }
}

TEST(AnalyticDensity, HandValues) {
    const auto spec = unit_variance_spec();
    const std::vector<double> x = {-3.0};
    EXPECT_NEAR(analytic_density(spec, 1, x), -0.016023310660462066, 1e-15);
    EXPECT_NEAR(analytic_density(spec, 0, x), 0.06475879783294587, 1e-15);
    EXPECT_NEAR(analytic_ratio(spec, x), -0.24743063794662118, 1e-14);
    const std::vector<double> origin = {0.0};
    SignedMixtureSpec std_normal;
    std_normal.reference.components = {{{0.0}, {1.0}, 1.0}};
    std_normal.target = std_normal.reference;
    EXPECT_NEAR(analytic_density(std_normal, 0, origin), 0.3989422804014327, 1e-16);
    EXPECT_DOUBLE_EQ(analytic_ratio(std_normal, origin), 1.0);
}

TEST(AnalyticDensity, VanishingReferenceThrows) {
    const auto spec = unit_variance_spec();
    const std::vector<double> far = {200.0};
    EXPECT_THROW(analytic_ratio(spec, far), NumericalError);
}

TEST(SubRatioOracle, RecombinesToTheRatio) {
    const auto spec = benchmark_spec();
    const auto oracle = sub_ratio_oracle(spec);
    EXPECT_NEAR(oracle.coefficient, 1.3, 1e-15);
    for (double x = -6.0; x <= 6.0; x += 0.25) {
        const std::vector<double> p = {x};
        const double r = oracle.coefficient * oracle.r_pp(p) + (1 - oracle.coefficient) * oracle.r_pm(p);
        EXPECT_NEAR(r, analytic_ratio(spec, p), 1e-12 * (1 + std::abs(r)));
        EXPECT_GT(oracle.r_pp(p), 0.0);
        EXPECT_GT(oracle.r_pm(p), 0.0);
    }
}

TEST(Sampling, SizesWeightsAndDeterminism) {
    const auto spec = benchmark_spec();
    const auto a = sample_mixture(spec, 5000, 17);
    const auto b = sample_mixture(spec, 5000, 17);
    const auto c = sample_mixture(spec, 5000, 18);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
    EXPECT_EQ(a.count(0), 5000u);
    EXPECT_EQ(a.count(1), 5000u);
    for (const auto& s : a) {
        if (s.label == 0) {
            EXPECT_DOUBLE_EQ(s.weight, 1.0);
        } else {
            EXPECT_DOUBLE_EQ(std::abs(s.weight), 1.6);
        }
    }
    EXPECT_THROW(sample_mixture(spec, 0, 1), ConfigError);
}

TEST(Sampling, WeightedMomentsAreUnbiased) {
    const auto spec = benchmark_spec();
    const auto d = sample_mixture(spec, 200000, 5);
    double m0 = 0.0, m1 = 0.0, w1 = 0.0, x2_0 = 0.0;
    for (const auto& s : d) {
        if (s.label == 0) {
            m0 += s.features[0];
            x2_0 += s.features[0] * s.features[0];
        } else {
            m1 += s.weight * s.features[0];
            w1 += s.weight;
        }
    }
    const double n = 200000.0;
    EXPECT_NEAR(m0 / n, 0.0, 0.02);
    EXPECT_NEAR(x2_0 / n, 4.0, 0.05);
    EXPECT_NEAR(w1 / n, 1.0, 0.01);
    EXPECT_NEAR(m1 / n, 1.3 * 1.0 - 0.3 * -1.0, 0.02);
}

TEST(Split, ExactSizesAndPartition) {
    const auto d = sample_mixture(benchmark_spec(), 1000, 3);
    const auto parts = split(d, {}, 99);
    EXPECT_EQ(parts.train.count(0), 650u);
    EXPECT_EQ(parts.train.count(1), 650u);
    EXPECT_EQ(parts.validation.count(0), 150u);
    EXPECT_EQ(parts.validation.count(1), 150u);
    EXPECT_EQ(parts.test.count(0), 200u);
    EXPECT_EQ(parts.test.count(1), 200u);

    std::map<std::vector<double>, int> seen;
    for (const auto* part : {&parts.train, &parts.validation, &parts.test}) {
        for (const auto& s : *part) ++seen[s.features];
    }
    for (const auto& s : d) {
        auto it = seen.find(s.features);
        ASSERT_NE(it, seen.end());
        --it->second;
    }
    for (const auto& [k, v] : seen) EXPECT_EQ(v, 0);
    EXPECT_EQ(split(d, {}, 99).train, parts.train);
}

TEST(Split, UnevenCountsStillSumToTotal) {
    const auto d = sample_mixture(benchmark_spec(), 37, 3);
    const auto parts = split(d, {}, 1);
    EXPECT_EQ(parts.train.size() + parts.validation.size() + parts.test.size(), d.size());
    EXPECT_THROW(split(d, {0.5, 0.5, 0.5}, 1), ConfigError);
}
