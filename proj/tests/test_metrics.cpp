#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "qdre/data.hpp"
#include "qdre/errors.hpp"
#include "qdre/metrics/closure.hpp"
#include "qdre/metrics/histogram.hpp"
#include "qdre/metrics/wasserstein.hpp"
#include "qdre/random.hpp"
#include "transport_oracle.hpp"

using namespace qdre;
using namespace qdre::metrics;

namespace {

SignedEmpiricalMeasure measure_1d(const std::vector<std::pair<double, double>>& pts) {
    SignedEmpiricalMeasure m(1);
    for (const auto& [x, w] : pts) m.add(std::vector<double>{x}, w);
    return m;
}

SwConfig exact_1d(bool normalize = true) { return {1, 1, 0, normalize}; }

SignedEmpiricalMeasure random_signed_1d(Rng& rng, double net, double negative) {
    // Net mass `net`, negative part of mass `negative`, 2-5 atoms per sign.
    std::vector<std::pair<double, double>> pts;
    const auto add_part = [&](double mass, double sign) {
        const std::size_t k = 2 + rng.below(4);
        std::vector<double> w(k);
        double s = 0.0;
        for (double& v : w) s += (v = rng.uniform(0.1, 1.0));
        for (double v : w) pts.push_back({rng.uniform(-3.0, 3.0), sign * mass * v / s});
    };
    add_part(net + negative, +1.0);
    add_part(negative, -1.0);
    return measure_1d(pts);
}

SignedMixtureSpec benchmark_spec() {
    SignedMixtureSpec spec;
    spec.reference.components = {{{0.0}, {4.0}, 1.0}};
    spec.target.components = {{{1.0}, {0.64}, 1.3}, {{-1.0}, {0.64}, -0.3}};
    return spec;
}

}  // namespace

TEST(W1, HandValues) {
    const std::vector<double> one = {1.0};
    EXPECT_DOUBLE_EQ(w1_1d(std::vector<double>{0.0}, one, std::vector<double>{1.0}, one), 1.0);
    EXPECT_DOUBLE_EQ(w1_1d(std::vector<double>{0.0, 2.0}, std::vector<double>{0.5, 0.5}, std::vector<double>{1.0}, one), 1.0);
    const std::vector<double> x = {0.3, -1.0, 2.0};
    const std::vector<double> w = {0.2, 0.5, 0.3};
    EXPECT_EQ(w1_1d(x, w, x, w), 0.0);
}

TEST(W1, TranslationCovarianceAndSymmetry) {
    Rng rng(1);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> xu(5), wu(5), xv(3), wv(3);
        for (double& v : xu) v = rng.uniform(-2, 2);
        for (double& v : xv) v = rng.uniform(-2, 2);
        double su = 0, sv = 0;
        for (double& v : wu) su += (v = rng.uniform());
        for (double& v : wv) sv += (v = rng.uniform());
        for (double& v : wu) v /= su;
        for (double& v : wv) v /= sv;
        const double d = w1_1d(xu, wu, xv, wv);
        EXPECT_EQ(d, w1_1d(xv, wv, xu, wu));
        auto su2 = xu, sv2 = xv;
        for (double& v : su2) v += 0.75;
        for (double& v : sv2) v += 0.75;
        EXPECT_NEAR(w1_1d(su2, wu, sv2, wv), d, 1e-13);
    }
}

TEST(W1, AgreesWithExhaustivePlanEnumeration) {
    Rng rng(2);
    for (int t = 0; t < 60; ++t) {
        const int denom = 2 + static_cast<int>(rng.below(7));
        auto draw = [&](std::vector<double>& x, std::vector<int>& a) {
            const std::size_t k = 1 + rng.below(std::min<std::uint64_t>(5, denom));
            a.assign(k, 1);
            for (int left = denom - static_cast<int>(k); left > 0; --left) ++a[rng.below(k)];
            x.resize(k);
            for (double& v : x) v = static_cast<double>(static_cast<int>(rng.below(21)) - 10) / 4.0;
        };
        std::vector<double> x, y;
        std::vector<int> a, b;
        draw(x, a);
        draw(y, b);
        std::vector<double> wa(a.begin(), a.end()), wb(b.begin(), b.end());
        for (double& v : wa) v /= denom;
        for (double& v : wb) v /= denom;
        EXPECT_NEAR(w1_1d(x, wa, y, wb), check::exhaustive_w1(x, a, y, b, denom), 1e-12);
    }
}

TEST(W1, Errors) {
    const std::vector<double> x = {0.0};
    EXPECT_THROW(w1_1d(x, std::vector<double>{1.0}, x, std::vector<double>{0.9}), DataError);
    EXPECT_THROW(w1_1d(x, std::vector<double>{-1.0}, x, std::vector<double>{-1.0}), DataError);
    EXPECT_NO_THROW(w1_1d(x, std::vector<double>{1.0}, x, std::vector<double>{1.0 + 1e-12}));
}

TEST(Directions, UnitNormAndSeeded) {
    const auto a = sample_directions(5, 40, 3);
    const auto b = sample_directions(5, 40, 3);
    const auto c = sample_directions(5, 40, 4);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
    for (std::size_t k = 0; k < 40; ++k) {
        double n = 0.0;
        for (std::size_t i = 0; i < 5; ++i) n += a[k * 5 + i] * a[k * 5 + i];
        EXPECT_NEAR(n, 1.0, 1e-14);
    }
    const auto one = sample_directions(1, 200, 5);
    for (double v : one) EXPECT_EQ(std::abs(v), 1.0);
}

TEST(ExtendedSw, SignedHandExample) {
    const auto mu = measure_1d({{0.0, 1.5}, {1.0, -0.5}});
    const auto nu = measure_1d({{0.0, 1.0}});
    const auto r = extended_sw1(mu, nu, {7, 3, 11, true});
    EXPECT_NEAR(r.mean, 1.0 / 3.0, 1e-12);
    EXPECT_NEAR(r.std, 0.0, 1e-12);
}

TEST(ExtendedSw, IdentityAndBitwiseSymmetry) {
    Rng rng(3);
    for (int t = 0; t < 20; ++t) {
        SignedEmpiricalMeasure mu(3), nu(3);
        for (int i = 0; i < 30; ++i) {
            std::vector<double> x = {rng.normal(), rng.normal(), rng.normal()};
            mu.add(x, rng.uniform(-0.5, 1.0));
            std::vector<double> y = {rng.normal(), rng.normal() + 0.5, rng.normal()};
            nu.add(y, rng.uniform(-0.5, 1.0));
        }
        const SwConfig cfg{10, 4, static_cast<std::uint64_t>(t), true};
        const auto self = extended_sw1(mu, mu, cfg);
        EXPECT_EQ(self.mean, 0.0);
        EXPECT_EQ(self.std, 0.0);
        const auto ab = extended_sw1(mu, nu, cfg);
        const auto ba = extended_sw1(nu, mu, cfg);
        EXPECT_EQ(ab.mean, ba.mean);
        EXPECT_EQ(ab.repeats, ba.repeats);
        EXPECT_GT(ab.mean, 0.0);
    }
}

TEST(ExtendedSw, ReducesToSlicedW1ForPositiveWeights) {
    Rng rng(4);
    SignedEmpiricalMeasure mu(2), nu(2);
    for (int i = 0; i < 40; ++i) {
        mu.add(std::vector<double>{rng.normal(), rng.normal()}, rng.uniform(0.1, 2.0));
        nu.add(std::vector<double>{rng.normal() + 1, rng.normal()}, rng.uniform(0.1, 2.0));
    }
    const SwConfig cfg{25, 3, 99, true};
    const auto r = extended_sw1(mu, nu, cfg);
    double sum_mu = 0.0, sum_nu = 0.0;
    for (double w : mu.weights) sum_mu += w;
    for (double w : nu.weights) sum_nu += w;
    for (std::size_t rep = 0; rep < cfg.n_repeats; ++rep) {
        const auto dirs = sample_directions(2, cfg.n_projections, derive_seed(cfg.seed, std::uint64_t{rep}));
        double acc = 0.0;
        for (std::size_t k = 0; k < cfg.n_projections; ++k) {
            std::vector<std::pair<double, double>> pu, pv;
            for (std::size_t i = 0; i < mu.size(); ++i) {
                pu.push_back({mu.point(i)[0] * dirs[2 * k] + mu.point(i)[1] * dirs[2 * k + 1], mu.weights[i] / sum_mu});
            }
            for (std::size_t i = 0; i < nu.size(); ++i) {
                pv.push_back({nu.point(i)[0] * dirs[2 * k] + nu.point(i)[1] * dirs[2 * k + 1], nu.weights[i] / sum_nu});
            }
            acc += check::quantile_w1(pu, pv);
        }
        EXPECT_NEAR(r.repeats[rep], acc / cfg.n_projections, 1e-12);
    }
}

TEST(ExtendedSw, TriangleInequalityOnMatchedMasses) {
    Rng rng(5);
    for (int t = 0; t < 100; ++t) {
        const double net = rng.uniform(0.5, 2.0);
        const double neg = rng.uniform(0.0, 1.0);
        const auto a = random_signed_1d(rng, net, neg);
        const auto b = random_signed_1d(rng, net, neg);
        const auto c = random_signed_1d(rng, net, neg);
        const auto d = [](const auto& x, const auto& y) { return extended_sw1(x, y, exact_1d()).mean; };
        EXPECT_LE(d(a, c), d(a, b) + d(b, c) + 1e-9);
    }
}

TEST(ExtendedSw, UnnormalisedIsAMetricForEqualNetMass) {
    Rng rng(6);
    for (int t = 0; t < 100; ++t) {
        const double net = rng.uniform(0.5, 2.0);
        const auto a = random_signed_1d(rng, net, rng.uniform(0.0, 1.0));
        const auto b = random_signed_1d(rng, net, rng.uniform(0.0, 1.0));
        const auto c = random_signed_1d(rng, net, rng.uniform(0.0, 1.0));
        const auto d = [](const auto& x, const auto& y) { return extended_sw1(x, y, exact_1d(false)).mean; };
        EXPECT_LE(d(a, c), d(a, b) + d(b, c) + 1e-9);
        EXPECT_NEAR(d(a, b), d(b, a), 1e-15);
    }
}

TEST(ExtendedSw, DecompositionIndependence) {
    // Adding +m and -m at the same point changes the decomposition, not the measure.
    const auto mu = measure_1d({{0.0, 1.2}, {1.0, -0.2}, {2.5, 0.4}});
    const auto nu = measure_1d({{0.5, 1.0}, {-1.0, 0.4}});
    auto padded = mu;
    padded.add(std::vector<double>{0.7}, 0.3);
    padded.add(std::vector<double>{0.7}, -0.3);
    const auto base = extended_sw1(mu, nu, exact_1d(false)).mean;
    EXPECT_NEAR(extended_sw1(padded, nu, exact_1d(false)).mean, base, 1e-12);
}

TEST(ExtendedSw, Errors) {
    const auto pos = measure_1d({{0.0, 1.0}});
    const auto neg = measure_1d({{0.0, -1.0}});
    EXPECT_THROW(extended_sw1(neg, pos, exact_1d()), DataError);  // mu+ + nu- is empty
    EXPECT_THROW(extended_sw1(pos, pos, {0, 1, 0, true}), ConfigError);
    EXPECT_THROW(extended_sw1(pos, SignedEmpiricalMeasure(2), exact_1d()), DataError);
    SignedEmpiricalMeasure m(1);
    EXPECT_THROW(m.add(std::vector<double>{NAN}, 1.0), DataError);
}

TEST(Histogram, FillAndEdges) {
    Histogram h({0.0, 1.0, 2.0});
    h.fill(0.5, 2.0);
    h.fill(1.0, 1.0);
    h.fill(2.0, 1.0);
    h.fill(3.0, 5.0);
    EXPECT_EQ(h.sum_w, (std::vector<double>{2.0, 2.0}));
    EXPECT_EQ(h.sum_w2, (std::vector<double>{4.0, 2.0}));
    EXPECT_DOUBLE_EQ(h.overflow, 5.0);
    EXPECT_DOUBLE_EQ(h.total(), 4.0);
    EXPECT_THROW(Histogram({1.0}), std::invalid_argument);
    EXPECT_THROW(Histogram({1.0, 1.0}), std::invalid_argument);

    std::vector<double> v(1001);
    for (int i = 0; i <= 1000; ++i) v[i] = i;
    const auto edges = percentile_edges(v, 50);
    EXPECT_EQ(edges.size(), 51u);
    EXPECT_DOUBLE_EQ(edges.front(), 5.0);
    EXPECT_DOUBLE_EQ(edges.back(), 995.0);
    EXPECT_DOUBLE_EQ(percentile({1.0, 2.0, 3.0, 4.0}, 50), 2.5);
    const auto flat = percentile_edges(std::vector<double>{2.0, 2.0}, 4);
    EXPECT_DOUBLE_EQ(flat.front(), 1.5);
    EXPECT_DOUBLE_EQ(flat.back(), 2.5);
}

TEST(Chi2, HandValues) {
    const std::vector<double> edges = {0.0, 1.0, 2.0, 3.0};
    Histogram t(edges), r(edges);
    const double a = 2.0 - std::sqrt(3.0);  // (2 - 2a)^2 = 2 + 2a^2
    for (double x : {0.5, 1.5, 2.5}) {
        t.fill(x, 1.0);
        t.fill(x, 1.0);
        r.fill(x, a);
        r.fill(x, a);
    }
    EXPECT_NEAR(chi2_score(t, r), 1.0, 1e-12);
    EXPECT_NEAR(chi2_score(t.scaled(2.0), r.scaled(2.0)), 1.0, 1e-12);
    EXPECT_EQ(chi2_score(t, t), 0.0);

    Histogram sparse(edges);
    sparse.fill(0.5, 1.0);
    Histogram sparse_r(edges);
    sparse_r.fill(0.5, 3.0);
    EXPECT_DOUBLE_EQ(chi2_score(sparse, sparse_r), 4.0 / 10.0);  // only bin 0 counts
    EXPECT_THROW(chi2_score(t, Histogram({0.0, 1.0})), DataError);
    EXPECT_THROW(chi2_score(Histogram(edges), Histogram(edges)), DataError);
}

TEST(Tsallis, HandValues) {
    const std::vector<double> edges = {0.0, 1.0, 2.0};
    Histogram p(edges), q(edges);
    p.fill(0.5, 1.0);
    q.fill(0.5, 0.5);
    q.fill(1.5, 0.5);
    const auto r = tsallis_d2(p, q);
    EXPECT_NEAR(r.value, 1.0, 1e-15);
    EXPECT_EQ(r.excluded_bins, 0u);
    EXPECT_EQ(tsallis_d2(q, q).value, 0.0);
    EXPECT_NEAR(tsallis_d2(p.scaled(7.0), q.scaled(0.1)).value, 1.0, 1e-14);

    Histogram neg(edges);
    neg.fill(0.5, 2.0);
    neg.fill(1.5, -0.5);
    const auto e = tsallis_d2(q, neg);
    EXPECT_EQ(e.excluded_bins, 1u);
    EXPECT_GE(e.value, 0.0);
    EXPECT_THROW(tsallis_d2(p, Histogram(edges)), DataError);
}

TEST(Closure, UnitRatioOnIdenticalSamplesCloses) {
    const auto spec = benchmark_spec();
    const auto d = sample_mixture(spec, 20000, 1);
    const auto ref = d.select(0);
    const std::vector<std::size_t> features = {0};
    const auto rep = reweight_closure(ref, [](std::span<const double>) { return 1.0; }, ref, features);
    EXPECT_EQ(rep.features[0].chi2, 0.0);
    EXPECT_EQ(rep.features[0].tsallis, 0.0);
}

TEST(Closure, OracleBeatsUnitRatio) {
    const auto spec = benchmark_spec();
    const auto d = sample_mixture(spec, 50000, 2);
    const auto ref = d.select(0);
    const auto tgt = d.select(1);
    const std::vector<std::size_t> features = {0};
    ClosureOptions opt;
    opt.sw = SwConfig{1, 1, 0, true};
    const auto oracle = reweight_closure(ref, [&](std::span<const double> x) { return analytic_ratio(spec, x); }, tgt,
                                         features, opt);
    const auto unit = reweight_closure(ref, [](std::span<const double>) { return 1.0; }, tgt, features, opt);
    EXPECT_LT(oracle.features[0].chi2, unit.features[0].chi2);
    EXPECT_LT(oracle.features[0].tsallis, unit.features[0].tsallis);
    EXPECT_LT(oracle.sw->mean, unit.sw->mean);
    const auto& f = oracle.features[0];
    EXPECT_NEAR(f.reweighted.total() + f.reweighted.overflow, f.target.total() + f.target.overflow, 1e-6);
}

TEST(Closure, OracleChi2IsNearOnePerBinWhereTargetIsPopulated) {
    // Pooled-range tails contain bins with no target entries, where sum w^2
    // underestimates the target variance; away from them the statistic
    // should sit near its expectation.
    const auto spec = benchmark_spec();
    const auto d = sample_mixture(spec, 100000, 7);
    const auto ref = d.select(0);
    const auto tgt = d.select(1);
    std::vector<double> xt, wt, xr, wr;
    for (const auto& s : tgt) {
        xt.push_back(s.features[0]);
        wt.push_back(s.weight);
    }
    double tt = 0.0, tr = 0.0;
    for (double w : wt) tt += w;
    for (const auto& s : ref) {
        xr.push_back(s.features[0]);
        wr.push_back(s.weight * analytic_ratio(spec, s.features));
        tr += wr.back();
    }
    for (double& w : wr) w *= tt / tr;
    const auto edges = percentile_edges(xt, 50, 2.0, 98.0);
    const double chi2 = chi2_score(make_histogram(edges, xt, wt), make_histogram(edges, xr, wr));
    EXPECT_GT(chi2, 0.5);
    EXPECT_LT(chi2, 1.6);
}

TEST(Closure, NonFiniteRatioIsReportedWithIndex) {
    const auto d = sample_mixture(benchmark_spec(), 100, 3);
    const auto ref = d.select(0);
    const std::vector<std::size_t> features = {0};
    std::size_t calls = 0;
    try {
        reweight_closure(ref, [&](std::span<const double>) { return calls++ == 7 ? NAN : 1.0; }, d.select(1), features);
        FAIL();
    } catch (const NumericalError& e) {
        EXPECT_NE(std::string(e.what()).find("sample 7"), std::string::npos);
    }
    const std::vector<std::size_t> bad_feature = {3};
    EXPECT_THROW(reweight_closure(ref, [](std::span<const double>) { return 1.0; }, d.select(1), bad_feature), DataError);
}
