#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "kz/fit.hpp"

using namespace kz;

namespace {

std::vector<FitPoint> power_law(double amplitude, double mu, double stderr_val = 0.0) {
    std::vector<FitPoint> points;
    for (double tau : {2.0, 4.0, 8.0, 16.0, 32.0, 64.0})
        points.push_back({tau, amplitude * std::pow(tau, -mu), stderr_val});
    return points;
}

} // namespace

TEST_CASE("exact power laws are recovered to machine precision", "[fit]") {
    for (double mu : {0.5, 1.5}) {
        PowerLawFit fit = fit_power_law(power_law(0.7, mu), {});
        CHECK(std::abs(fit.mu - mu) < 1e-12);
        CHECK(fit.sigma < 1e-12);
        for (double r : fit.residuals) CHECK(std::abs(r) < 1e-12);
    }
}

TEST_CASE("rescaling the density moves only the intercept", "[fit]") {
    PowerLawFit base = fit_power_law(power_law(0.7, 0.5), {});
    auto scaled_points = power_law(0.7, 0.5);
    for (auto& p : scaled_points) p.eta *= 3.7;
    PowerLawFit scaled = fit_power_law(scaled_points, {});
    CHECK(std::abs(scaled.mu - base.mu) < 1e-12);
    CHECK(std::abs(scaled.intercept - base.intercept - std::log2(3.7)) < 1e-12);
}

TEST_CASE("rescaling the quench rate moves only the intercept", "[fit]") {
    auto points = power_law(0.7, 0.5);
    FitWindow window{points.front().tau_q, points.back().tau_q};
    PowerLawFit base = fit_power_law(points, window);
    for (auto& p : points) p.tau_q *= 1.75;
    FitWindow shifted{window.tau_min * 1.75, window.tau_max * 1.75};
    PowerLawFit moved = fit_power_law(points, shifted);
    CHECK(std::abs(moved.mu - base.mu) < 1e-12);
}

TEST_CASE("fitting is independent of point ordering", "[fit]") {
    auto points = power_law(0.4, 0.73);
    points[1].eta *= 1.02;  // break exactness so ordering could matter
    PowerLawFit a = fit_power_law(points, {});
    std::reverse(points.begin(), points.end());
    std::swap(points[0], points[3]);
    PowerLawFit b = fit_power_law(points, {});
    CHECK(a.mu == b.mu);
    CHECK(a.intercept == b.intercept);
}

TEST_CASE("non-positive densities are excluded, small windows rejected", "[fit]") {
    auto points = power_law(0.7, 0.5);
    points[2].eta = 0.0;
    PowerLawFit fit = fit_power_law(points, {});
    CHECK(fit.excluded == 1);
    CHECK(fit.log2_tau.size() == 5);
    CHECK(std::abs(fit.mu - 0.5) < 1e-12);

    std::vector<FitPoint> few = {{2.0, 0.5, 0.0}, {4.0, 0.35, 0.0}};
    CHECK_THROWS_AS(fit_power_law(few, {}), std::invalid_argument);
    CHECK_THROWS_AS(fit_power_law(power_law(0.7, 0.5), FitWindow{100.0, 200.0}),
                    std::invalid_argument);
}

TEST_CASE("weighted fits propagate the stated uncertainties", "[fit]") {
    // noisy synthetic data with known sigma: the quoted sigma_mu should
    // cover the truth at the usual rate
    std::mt19937 gen(31);
    const double sigma_eta = 0.004;
    int covered = 0;
    const int resamples = 100;
    for (int trial = 0; trial < resamples; ++trial) {
        auto points = power_law(0.7, 0.5, sigma_eta);
        std::normal_distribution<double> noise(0.0, sigma_eta);
        for (auto& p : points) p.eta = std::max(1e-6, p.eta + noise(gen));
        PowerLawFit fit = fit_power_law(points, {});
        CHECK(fit.sigma > 0.0);
        if (std::abs(fit.mu - 0.5) <= 3.0 * fit.sigma) ++covered;
    }
    CHECK(covered >= 95);
}

TEST_CASE("extrapolation examples", "[fit]") {
    SECTION("exact linear-in-1/N input") {
        std::vector<PerSizeFit> per_n;
        for (int n : {16, 32, 64, 128}) per_n.push_back({n, 0.5 - 2.0 / n, 0.0, 0.0});
        ExtrapolationResult r = extrapolate(per_n);
        CHECK(r.extrapolated);
        CHECK(std::abs(r.mu_inf - 0.5) < 1e-12);
    }
    SECTION("constant input returns the constant") {
        std::vector<PerSizeFit> per_n;
        for (int n : {16, 32, 64}) per_n.push_back({n, 0.433, 0.0, 0.0});
        CHECK(std::abs(extrapolate(per_n).mu_inf - 0.433) < 1e-12);
    }
    SECTION("fewer than three sizes falls back to the largest") {
        std::vector<PerSizeFit> per_n = {{16, 0.42, 0.01, 0.0}, {32, 0.46, 0.01, 0.0}};
        ExtrapolationResult r = extrapolate(per_n);
        CHECK_FALSE(r.extrapolated);
        CHECK(r.mu_inf == Catch::Approx(0.46));
    }
    SECTION("largest_n mode skips the 1/N fit") {
        std::vector<PerSizeFit> per_n;
        for (int n : {16, 32, 64}) per_n.push_back({n, 0.5 - 2.0 / n, 0.0, 0.0});
        ExtrapolationResult r = extrapolate(per_n, Extrapolation::LargestN);
        CHECK_FALSE(r.extrapolated);
        CHECK(r.mu_inf == Catch::Approx(0.5 - 2.0 / 64));
    }
    SECTION("noisy resampling covers the true intercept") {
        std::mt19937 gen(7);
        const double sigma = 0.01;
        std::normal_distribution<double> noise(0.0, sigma);
        int covered = 0;
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<PerSizeFit> per_n;
            for (int n : {16, 24, 32, 48, 64})
                per_n.push_back({n, 0.5 - 2.0 / n + noise(gen), sigma, 0.0});
            ExtrapolationResult r = extrapolate(per_n);
            if (std::abs(r.mu_inf - 0.5) <= 3.0 * r.sigma_inf) ++covered;
        }
        CHECK(covered >= 95);
    }
}

TEST_CASE("two-regime fits", "[fit]") {
    // piecewise synthetic: mu = 0.5 up to tau = 16, mu = 1.5 beyond
    std::vector<FitPoint> points;
    const double knee = 16.0;
    const double amp_short = 0.7;
    const double amp_long = amp_short * std::pow(knee, -0.5) / std::pow(knee, -1.5);
    for (double tau : {2.0, 4.0, 8.0, 16.0})
        points.push_back({tau, amp_short * std::pow(tau, -0.5), 0.0});
    for (double tau : {32.0, 64.0, 128.0, 256.0})
        points.push_back({tau, amp_long * std::pow(tau, -1.5), 0.0});

    auto [short_fit, long_fit] = two_regime_fit(points, {2.0, 16.0}, {32.0, 256.0});
    CHECK(std::abs(short_fit.mu - 0.5) < 1e-12);
    CHECK(std::abs(long_fit.mu - 1.5) < 1e-12);

    CHECK_THROWS_AS(two_regime_fit(points, {2.0, 32.0}, {32.0, 256.0}), std::invalid_argument);

    // a pure power law yields the same exponent in both regimes
    auto uniform = power_law(0.7, 0.5);
    auto [a, b] = two_regime_fit(uniform, {2.0, 8.0}, {16.0, 64.0});
    CHECK(std::abs(a.mu - b.mu) < 1e-12);
}

TEST_CASE("aggregated result and exports", "[fit]") {
    std::map<int, std::vector<FitPoint>> per_n;
    for (int n : {16, 32, 64}) per_n[n] = power_law(0.7 + 0.001 * n, 0.5 - 2.0 / n);
    FitResult r = analyze_sweep(per_n, {});
    CHECK(std::abs(r.mu_inf - 0.5) < 1e-10);
    CHECK(r.extrapolated);

    nlohmann::json j = fit_result_json(r);
    CHECK(j["per_n"].size() == 3);
    CHECK(std::abs(j["mu_inf"].get<double>() - 0.5) < 1e-10);

    std::string csv = plot_data_csv(r.detail_per_n.at(64));
    CHECK(csv.rfind("log2_tau,log2_eta,weight,fitted\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);  // header + 6 points
}
