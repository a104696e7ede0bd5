#pragma once

// Probability models of effort usage.
//
// Every model exposes the same statistics (mean, median, mode, variance,
// E[1/X], cdf) and a sampler that takes the random engine as an argument, so
// a distribution value never carries mutable state.

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <boost/rational.hpp>

#include "estbias/errors.hpp"
#include "estbias/measures.hpp"
#include "estbias/text.hpp"

namespace estbias {

/// Engine used by the simulation; distributions accept any URBG.
using Engine = std::mt19937_64;

/// Minimum needed to simulate against a model.
template <class D>
concept SampleableEffort = requires(const D& d, Engine& g) {
    { d.sample(g) } -> std::convertible_to<double>;
    { d.mean() } -> std::convertible_to<double>;
    { d.median() } -> std::convertible_to<double>;
};

/// Full closed-form contract.
template <class D>
concept EffortDistribution = SampleableEffort<D> && requires(const D& d, double x) {
    { d.mode() } -> std::convertible_to<double>;
    { d.variance() } -> std::convertible_to<double>;
    { d.reciprocal_mean() } -> std::convertible_to<double>;
    { d.cdf(x) } -> std::convertible_to<double>;
};

/// 1 / E[1/X]; the estimate with zero expected (act - est)/act.
template <EffortDistribution D>
double harmonic_point(const D& d) {
    return 1.0 / d.reciprocal_mean();
}

// ---------------------------------------------------------------------------
// Log-normal

class LogNormalEffort {
public:
    LogNormalEffort(double mu_log, double sigma_log) : mu_(mu_log), sigma_(sigma_log) {
        if (!std::isfinite(mu_log) || !std::isfinite(sigma_log) || sigma_log <= 0.0) {
            throw DomainError("log-normal requires finite mu_log and sigma_log > 0");
        }
    }

    double mu_log() const noexcept { return mu_; }
    double sigma_log() const noexcept { return sigma_; }

    double mean() const noexcept { return std::exp(mu_ + s2() / 2.0); }
    double median() const noexcept { return std::exp(mu_); }
    double mode() const noexcept { return std::exp(mu_ - s2()); }
    double variance() const noexcept { return std::expm1(s2()) * std::exp(2.0 * mu_ + s2()); }
    double reciprocal_mean() const noexcept { return std::exp(-mu_ + s2() / 2.0); }

    double cdf(double x) const noexcept {
        if (x <= 0.0) return 0.0;
        return 0.5 * std::erfc(-(std::log(x) - mu_) / (sigma_ * std::numbers::sqrt2));
    }

    template <class URBG>
    double sample(URBG& g) const {
        std::normal_distribution<double> z(0.0, 1.0);
        return std::exp(mu_ + sigma_ * z(g));
    }

private:
    double s2() const noexcept { return sigma_ * sigma_; }

    double mu_;
    double sigma_;
};

/// Moment inversion: sigma^2 = ln(1 + (sd/mean)^2), mu = ln(mean) - sigma^2/2.
inline LogNormalEffort lognormal_from_mean_sd(double mean, double sd) {
    if (!(mean > 0.0) || !(sd > 0.0) || !std::isfinite(mean) || !std::isfinite(sd)) {
        throw DomainError("lognormal_from_mean_sd: mean and sd must be > 0");
    }
    const double cv = sd / mean;
    const double s2 = std::log1p(cv * cv);
    return LogNormalEffort(std::log(mean) - s2 / 2.0, std::sqrt(s2));
}

/// mu = ln(median), sigma^2 = 2 ln(mean/median). Requires mean > median.
inline LogNormalEffort lognormal_from_mean_median(double mean, double median) {
    if (!(median > 0.0) || !std::isfinite(mean) || !std::isfinite(median)) {
        throw DomainError("lognormal_from_mean_median: median must be > 0");
    }
    if (!(mean > median)) throw DomainError("lognormal_from_mean_median: a log-normal needs mean > median");
    return LogNormalEffort(std::log(median), std::sqrt(2.0 * std::log(mean / median)));
}

// ---------------------------------------------------------------------------
// Product of two fair dice

using Rational = boost::rational<std::int64_t>;

struct DiceAtom {
    int outcome = 0;
    int multiplicity = 0;  // out of 36
    Rational probability;
};

/// The 18 distinct products of two fair dice, ascending, with exact
/// probabilities.
inline std::vector<DiceAtom> dice_enumerate() {
    std::array<int, 37> counts{};
    for (int a = 1; a <= 6; ++a) {
        for (int b = 1; b <= 6; ++b) ++counts[static_cast<std::size_t>(a * b)];
    }
    std::vector<DiceAtom> atoms;
    for (int v = 1; v <= 36; ++v) {
        const int c = counts[static_cast<std::size_t>(v)];
        if (c > 0) atoms.push_back({v, c, Rational(c, 36)});
    }
    return atoms;
}

class DiceProduct {
public:
    DiceProduct() : atoms_(dice_enumerate()) {}

    std::span<const DiceAtom> atoms() const noexcept { return atoms_; }

    /// All 36 equally likely outcomes, ascending.
    std::vector<int> outcomes() const {
        std::vector<int> out;
        out.reserve(36);
        for (const auto& a : atoms_) out.insert(out.end(), static_cast<std::size_t>(a.multiplicity), a.outcome);
        return out;
    }

    Rational mean_exact() const {
        Rational m;
        for (const auto& a : atoms_) m += a.probability * a.outcome;
        return m;
    }
    Rational variance_exact() const {
        Rational m2;
        for (const auto& a : atoms_) m2 += a.probability * a.outcome * a.outcome;
        const Rational m = mean_exact();
        return m2 - m * m;
    }
    Rational reciprocal_mean_exact() const {
        Rational r;
        for (const auto& a : atoms_) r += a.probability / a.outcome;
        return r;
    }

    double mean() const { return boost::rational_cast<double>(mean_exact()); }
    double variance() const { return boost::rational_cast<double>(variance_exact()); }
    double reciprocal_mean() const { return boost::rational_cast<double>(reciprocal_mean_exact()); }

    /// Midpoint of the 18th and 19th of the 36 ordered outcomes.
    double median() const {
        const auto all = outcomes();
        return (all[17] + all[18]) / 2.0;
    }

    /// Most frequent product. 6 and 12 both occur four times; the tie goes to
    /// the smaller value.
    double mode() const {
        const auto it = std::max_element(atoms_.begin(), atoms_.end(),
                                         [](const DiceAtom& a, const DiceAtom& b) { return a.multiplicity < b.multiplicity; });
        return it->outcome;
    }

    double cdf(double x) const {
        int below = 0;
        for (const auto& a : atoms_) {
            if (a.outcome <= x) below += a.multiplicity;
        }
        return below / 36.0;
    }

    template <class URBG>
    double sample(URBG& g) const {
        std::uniform_int_distribution<int> die(1, 6);
        const int a = die(g);
        const int b = die(g);
        return a * b;
    }

private:
    std::vector<DiceAtom> atoms_;
};

// ---------------------------------------------------------------------------
// Empirical

/// Type-7 (linear interpolation) quantile of sorted data.
inline double sorted_quantile(std::span<const double> sorted, double p) {
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

class Empirical {
public:
    explicit Empirical(std::vector<double> samples) : sorted_(std::move(samples)) {
        if (sorted_.empty()) throw DomainError("empirical distribution needs at least one sample");
        for (double x : sorted_) {
            if (!std::isfinite(x) || x <= 0.0) throw DomainError("empirical samples must be finite and > 0");
        }
        std::sort(sorted_.begin(), sorted_.end());
    }

    std::span<const double> samples() const noexcept { return sorted_; }
    std::size_t size() const noexcept { return sorted_.size(); }

    double mean() const { return mean_of(sorted_); }
    double median() const { return median_of(sorted_); }

    /// Variance of the empirical distribution itself (divides by n).
    double variance() const {
        const double m = mean();
        double ss = 0.0;
        for (double x : sorted_) ss += (x - m) * (x - m);
        return ss / static_cast<double>(sorted_.size());
    }

    double reciprocal_mean() const {
        double s = 0.0;
        for (double x : sorted_) s += 1.0 / x;
        return s / static_cast<double>(sorted_.size());
    }

    /// Midpoint of the densest Freedman-Diaconis bin (lowest bin on ties).
    double mode() const {
        const double lo = sorted_.front();
        const double range = sorted_.back() - lo;
        if (range <= 0.0) return lo;
        const auto n = static_cast<double>(sorted_.size());
        double width = 2.0 * (sorted_quantile(sorted_, 0.75) - sorted_quantile(sorted_, 0.25)) / std::cbrt(n);
        if (width <= 0.0) width = range / std::ceil(std::sqrt(n));
        const auto bins = static_cast<std::size_t>(std::floor(range / width)) + 1;
        std::vector<std::size_t> counts(bins, 0);
        for (double x : sorted_) {
            auto k = static_cast<std::size_t>(std::floor((x - lo) / width));
            ++counts[std::min(k, bins - 1)];
        }
        const auto best = static_cast<double>(std::max_element(counts.begin(), counts.end()) - counts.begin());
        return lo + (best + 0.5) * width;
    }

    double cdf(double x) const {
        const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
        return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
    }

    template <class URBG>
    double sample(URBG& g) const {
        std::uniform_int_distribution<std::size_t> pick(0, sorted_.size() - 1);
        return sorted_[pick(g)];
    }

private:
    std::vector<double> sorted_;
};

/// Reads a single column of positive reals; a non-numeric first line is
/// treated as a header.
inline Empirical load_empirical_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::vector<double> values;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto t = text::trim(line);
        if (t.empty()) continue;
        if (t.find_first_of(",;") != std::string_view::npos) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": expected a single column");
        }
        const auto v = text::parse_double(text::unquote(t));
        if (!v) {
            if (values.empty() && line_no == 1) continue;
            throw ParseError(path + ":" + std::to_string(line_no) + ": not a number: '" + std::string(t) + "'");
        }
        if (!(*v > 0.0) || !std::isfinite(*v)) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": effort must be > 0");
        }
        values.push_back(*v);
    }
    if (values.empty()) throw ParseError(path + ": no samples");
    return Empirical(std::move(values));
}

// ---------------------------------------------------------------------------
// Runtime-selected model

/// Type-erased distribution chosen at runtime (CLI specs). Itself models
/// EffortDistribution, so every generic algorithm accepts it.
class AnyDistribution {
public:
    using Variant = std::variant<LogNormalEffort, DiceProduct, Empirical>;

    template <class D>
        requires std::constructible_from<Variant, D>
    AnyDistribution(D d) : v_(std::move(d)) {}  // NOLINT(google-explicit-constructor)

    const Variant& variant() const noexcept { return v_; }

    template <class D>
    const D* get_if() const noexcept {
        return std::get_if<D>(&v_);
    }

    double mean() const { return visit([](const auto& d) { return d.mean(); }); }
    double median() const { return visit([](const auto& d) { return d.median(); }); }
    double mode() const { return visit([](const auto& d) { return d.mode(); }); }
    double variance() const { return visit([](const auto& d) { return d.variance(); }); }
    double reciprocal_mean() const { return visit([](const auto& d) { return d.reciprocal_mean(); }); }
    double cdf(double x) const { return visit([x](const auto& d) { return d.cdf(x); }); }

    template <class URBG>
    double sample(URBG& g) const {
        return visit([&g](const auto& d) { return d.sample(g); });
    }

private:
    template <class F>
    double visit(F&& f) const {
        return std::visit(std::forward<F>(f), v_);
    }

    Variant v_;
};

static_assert(EffortDistribution<LogNormalEffort>);
static_assert(EffortDistribution<DiceProduct>);
static_assert(EffortDistribution<Empirical>);
static_assert(EffortDistribution<AnyDistribution>);

/// Parses `lognormal:mean=236,sd=126`, `lognormal:mean=236,median=209`,
/// `lognormal:mu=5.3,sigma=0.5`, `dice` or `empirical:<path.csv>`.
inline AnyDistribution parse_distribution_spec(std::string_view spec) {
    spec = text::trim(spec);
    const auto colon = spec.find(':');
    const auto kind = spec.substr(0, colon);
    const auto args = colon == std::string_view::npos ? std::string_view{} : spec.substr(colon + 1);

    if (kind == "dice") {
        if (!args.empty()) throw ParseError("'dice' takes no parameters");
        return DiceProduct{};
    }
    if (kind == "empirical") {
        if (args.empty()) throw ParseError("'empirical' needs a file path: empirical:<path.csv>");
        return load_empirical_csv(std::string(args));
    }
    if (kind == "lognormal") {
        std::optional<double> mean, sd, median, mu, sigma;
        for (auto kv : text::split(args, ',')) {
            const auto eq = kv.find('=');
            if (eq == std::string_view::npos) throw ParseError("bad lognormal parameter '" + std::string(kv) + "'");
            const auto key = text::trim(kv.substr(0, eq));
            const auto value = text::parse_double(kv.substr(eq + 1));
            if (!value) throw ParseError("bad number in lognormal parameter '" + std::string(kv) + "'");
            if (key == "mean") mean = value;
            else if (key == "sd") sd = value;
            else if (key == "median") median = value;
            else if (key == "mu") mu = value;
            else if (key == "sigma") sigma = value;
            else throw ParseError("unknown lognormal parameter '" + std::string(key) + "'");
        }
        if (mean && sd && !median && !mu && !sigma) return lognormal_from_mean_sd(*mean, *sd);
        if (mean && median && !sd && !mu && !sigma) return lognormal_from_mean_median(*mean, *median);
        if (mu && sigma && !mean && !sd && !median) return LogNormalEffort(*mu, *sigma);
        throw ParseError("lognormal needs exactly one of: mean+sd, mean+median, mu+sigma");
    }
    throw ParseError("unknown distribution spec '" + std::string(spec) + "'");
}

}  // namespace estbias
