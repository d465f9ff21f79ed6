#pragma once

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace kz {

struct FitPoint {
    double tau_q = 0.0;
    double eta = 0.0;
    double stderr_val = 0.0;
};

struct FitWindow {
    double tau_min = 2.0;
    double tau_max = 64.0;

    bool contains(double tau) const { return tau >= tau_min && tau <= tau_max; }
    bool overlaps(const FitWindow& other) const {
        return tau_min <= other.tau_max && other.tau_min <= tau_max;
    }
};

struct PowerLawFit {
    double mu = 0.0;         // negative slope of log2(eta) vs log2(tau)
    double sigma = 0.0;
    double intercept = 0.0;
    std::vector<double> log2_tau;
    std::vector<double> log2_eta;
    std::vector<double> weights;
    std::vector<double> fitted;
    std::vector<double> residuals;
    int excluded = 0;        // non-positive densities dropped from the window
};

namespace detail {

struct LineFit {
    double slope = 0.0, intercept = 0.0;
    double var_slope = 0.0, var_intercept = 0.0;
};

// Weighted least squares for y = a + b x. With uniform weights the
// parameter variances are scaled by the residual variance; with supplied
// weights they come from straight error propagation.
inline LineFit weighted_line(const std::vector<double>& x, const std::vector<double>& y,
                             const std::vector<double>& w, bool residual_scaled) {
    const std::size_t n = x.size();
    double s = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        s += w[i];
        sx += w[i] * x[i];
        sy += w[i] * y[i];
        sxx += w[i] * x[i] * x[i];
        sxy += w[i] * x[i] * y[i];
    }
    const double delta = s * sxx - sx * sx;
    if (delta == 0.0) throw std::invalid_argument("fit: degenerate abscissae");
    LineFit fit;
    fit.slope = (s * sxy - sx * sy) / delta;
    fit.intercept = (sxx * sy - sx * sxy) / delta;
    fit.var_slope = s / delta;
    fit.var_intercept = sxx / delta;
    if (residual_scaled) {
        double rss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y[i] - fit.intercept - fit.slope * x[i];
            rss += w[i] * r * r;
        }
        const double dof = static_cast<double>(n) - 2.0;
        const double scale = dof > 0 ? rss / dof : 0.0;
        fit.var_slope *= scale;
        fit.var_intercept *= scale;
    }
    return fit;
}

} // namespace detail

// log2-log2 power-law fit, eta ~ tau^(-mu). Weights follow the supplied
// standard errors propagated through the logarithm; any zero stderr in the
// window switches the whole fit to uniform weights with residual-based
// uncertainties.
inline PowerLawFit fit_power_law(std::vector<FitPoint> points, const FitWindow& window) {
    std::sort(points.begin(), points.end(),
              [](const FitPoint& a, const FitPoint& b) { return a.tau_q < b.tau_q; });

    PowerLawFit out;
    std::vector<double> stderrs;
    for (const auto& p : points) {
        if (!window.contains(p.tau_q)) continue;
        if (p.eta <= 0.0) {
            std::cerr << "fit_power_law: excluding non-positive defect density at tau_q="
                      << p.tau_q << "\n";
            ++out.excluded;
            continue;
        }
        out.log2_tau.push_back(std::log2(p.tau_q));
        out.log2_eta.push_back(std::log2(p.eta));
        stderrs.push_back(p.stderr_val);
    }
    if (out.log2_tau.size() < 3)
        throw std::invalid_argument("fit_power_law: need at least 3 usable points in the window");

    bool uniform = false;
    for (double s : stderrs) uniform = uniform || s <= 0.0;
    out.weights.resize(stderrs.size());
    for (std::size_t i = 0; i < stderrs.size(); ++i) {
        if (uniform) {
            out.weights[i] = 1.0;
        } else {
            const double sigma_log = stderrs[i] / (std::exp2(out.log2_eta[i]) * M_LN2);
            out.weights[i] = 1.0 / (sigma_log * sigma_log);
        }
    }

    detail::LineFit line = detail::weighted_line(out.log2_tau, out.log2_eta, out.weights, uniform);
    out.mu = -line.slope;
    out.sigma = std::sqrt(std::max(0.0, line.var_slope));
    out.intercept = line.intercept;
    for (std::size_t i = 0; i < out.log2_tau.size(); ++i) {
        out.fitted.push_back(line.intercept + line.slope * out.log2_tau[i]);
        out.residuals.push_back(out.log2_eta[i] - out.fitted.back());
    }
    return out;
}

struct PerSizeFit {
    int n_sites = 0;
    double mu = 0.0;
    double sigma = 0.0;
    double intercept = 0.0;
};

enum class Extrapolation { LinearInvN, LargestN };

inline std::string extrapolation_name(Extrapolation e) {
    return e == Extrapolation::LinearInvN ? "linear_inv_n" : "largest_n";
}

struct ExtrapolationResult {
    double mu_inf = 0.0;
    double sigma_inf = 0.0;
    bool extrapolated = false;  // false: fell back to the largest size
};

// Thermodynamic estimate from a weighted linear fit of mu(N) against 1/N;
// the intercept is the N -> infinity value. Fewer than 3 sizes (or the
// largest_n mode) report the largest chain instead.
inline ExtrapolationResult extrapolate(std::vector<PerSizeFit> per_n,
                                       Extrapolation mode = Extrapolation::LinearInvN) {
    if (per_n.empty()) throw std::invalid_argument("extrapolate: no per-size fits");
    std::sort(per_n.begin(), per_n.end(),
              [](const PerSizeFit& a, const PerSizeFit& b) { return a.n_sites < b.n_sites; });
    per_n.erase(std::unique(per_n.begin(), per_n.end(),
                            [](const PerSizeFit& a, const PerSizeFit& b) {
                                return a.n_sites == b.n_sites;
                            }),
                per_n.end());

    ExtrapolationResult out;
    if (mode == Extrapolation::LargestN || per_n.size() < 3) {
        out.mu_inf = per_n.back().mu;
        out.sigma_inf = per_n.back().sigma;
        out.extrapolated = false;
        return out;
    }

    std::vector<double> x, y, w;
    bool uniform = false;
    for (const auto& f : per_n) uniform = uniform || f.sigma <= 0.0;
    for (const auto& f : per_n) {
        x.push_back(1.0 / f.n_sites);
        y.push_back(f.mu);
        w.push_back(uniform ? 1.0 : 1.0 / (f.sigma * f.sigma));
    }
    detail::LineFit line = detail::weighted_line(x, y, w, uniform);
    out.mu_inf = line.intercept;
    out.sigma_inf = std::sqrt(std::max(0.0, line.var_intercept));
    out.extrapolated = true;
    return out;
}

// Short- and long-quench exponents from disjoint windows.
inline std::pair<PowerLawFit, PowerLawFit> two_regime_fit(const std::vector<FitPoint>& points,
                                                          const FitWindow& short_window,
                                                          const FitWindow& long_window) {
    if (short_window.overlaps(long_window))
        throw std::invalid_argument("two_regime_fit: windows overlap");
    return {fit_power_law(points, short_window), fit_power_law(points, long_window)};
}

// --- aggregated result + exports -------------------------------------------

struct FitResult {
    std::vector<PerSizeFit> per_n;
    std::map<int, PowerLawFit> detail_per_n;
    double mu_inf = 0.0;
    double sigma_inf = 0.0;
    FitWindow window;
    Extrapolation mode = Extrapolation::LinearInvN;
    bool extrapolated = false;
};

inline FitResult analyze_sweep(const std::map<int, std::vector<FitPoint>>& points_per_n,
                               const FitWindow& window,
                               Extrapolation mode = Extrapolation::LinearInvN) {
    FitResult result;
    result.window = window;
    result.mode = mode;
    for (const auto& [n, points] : points_per_n) {
        PowerLawFit fit = fit_power_law(points, window);
        result.detail_per_n[n] = fit;
        result.per_n.push_back({n, fit.mu, fit.sigma, fit.intercept});
    }
    if (result.per_n.empty()) throw std::invalid_argument("analyze_sweep: nothing to fit");
    ExtrapolationResult ex = extrapolate(result.per_n, mode);
    result.mu_inf = ex.mu_inf;
    result.sigma_inf = ex.sigma_inf;
    result.extrapolated = ex.extrapolated;
    return result;
}

inline nlohmann::json fit_result_json(const FitResult& r) {
    nlohmann::json j;
    j["mu_inf"] = r.mu_inf;
    j["sigma_inf"] = r.sigma_inf;
    j["extrapolated"] = r.extrapolated;
    j["extrapolation"] = extrapolation_name(r.mode);
    j["fit_window"] = {r.window.tau_min, r.window.tau_max};
    j["per_n"] = nlohmann::json::array();
    for (const auto& f : r.per_n) {
        nlohmann::json detail;
        const PowerLawFit& d = r.detail_per_n.at(f.n_sites);
        detail["n"] = f.n_sites;
        detail["mu"] = f.mu;
        detail["sigma"] = f.sigma;
        detail["intercept"] = f.intercept;
        detail["excluded_points"] = d.excluded;
        detail["residuals"] = d.residuals;
        j["per_n"].push_back(detail);
    }
    return j;
}

// Plot-data CSV for one chain size: log2_tau,log2_eta,weight,fitted
inline std::string plot_data_csv(const PowerLawFit& fit) {
    std::ostringstream out;
    out.precision(17);
    out << "log2_tau,log2_eta,weight,fitted\n";
    for (std::size_t i = 0; i < fit.log2_tau.size(); ++i)
        out << fit.log2_tau[i] << ',' << fit.log2_eta[i] << ',' << fit.weights[i] << ','
            << fit.fitted[i] << '\n';
    return out.str();
}

} // namespace kz
