#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace loopsoup
{

/// Deterministic random stream identified by (seed, stream id).
///
/// Only the engine is taken from the standard library (mt19937_64 and
/// seed_seq are bit-specified); every variate transform is written out here
/// so that output does not depend on the standard library vendor.
class RngStream
{
  public:
    RngStream(std::uint64_t seed, std::uint64_t stream = 0)
        : seed_(seed), stream_(stream), engine_(make_engine(seed, stream))
    {
    }

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on the half-open interval (0, 1].
    double uniform_open0()
    {
        return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
    }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double exponential(double rate) { return -std::log(uniform_open0()) / rate; }

    /// Inversion; means above 32 are split into independent halves.
    std::uint64_t poisson(double mean)
    {
        if (mean <= 0.0)
            return 0;
        if (mean > 32.0)
            return poisson(0.5 * mean) + poisson(0.5 * mean);
        double u = uniform();
        double p = std::exp(-mean);
        double cdf = p;
        std::uint64_t k = 0;
        while (u >= cdf) {
            ++k;
            p *= mean / static_cast<double>(k);
            double next = cdf + p;
            if (next == cdf)
                break;
            cdf = next;
        }
        return k;
    }

    /// Index drawn from a nondecreasing cumulative table whose last entry is
    /// the total mass (need not be exactly 1).
    std::size_t discrete(std::span<const double> cumulative)
    {
        double u = uniform() * cumulative.back();
        std::size_t i = 0;
        while (i + 1 < cumulative.size() && u >= cumulative[i])
            ++i;
        return i;
    }

    /// Independent child stream; advances this stream by one draw.
    RngStream child(std::uint64_t tag) { return RngStream(next_u64(), tag); }

  private:
    static std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream)
    {
        std::seed_seq seq{static_cast<std::uint32_t>(seed),
                          static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream),
                          static_cast<std::uint32_t>(stream >> 32)};
        return std::mt19937_64(seq);
    }

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::mt19937_64 engine_;
};

/// Logarithmic(r) law, P(k) = r^k / (k * -log(1-r)), sampled by inversion
/// from a cached cumulative table that stops once the tail is below 1e-12.
class LogarithmicTable
{
  public:
    LogarithmicTable() = default;

    explicit LogarithmicTable(double r) : r_(r)
    {
        if (r_ <= 0.0)
            return;
        norm_ = -std::log1p(-r_);
        double p = r_ / norm_;
        double cdf = 0.0;
        for (std::uint64_t k = 1;; ++k) {
            cdf += p;
            cumulative_.push_back(cdf);
            if (1.0 - cdf < 1e-12 || cumulative_.size() >= 1'000'000)
                break;
            p *= r_ * static_cast<double>(k) / static_cast<double>(k + 1);
        }
    }

    double r() const noexcept { return r_; }

    std::uint64_t sample(RngStream& rng) const
    {
        double u = rng.uniform();
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        if (it != cumulative_.end())
            return static_cast<std::uint64_t>(it - cumulative_.begin()) + 1;
        // Tail beyond the table: continue the recursion on the fly.
        std::uint64_t k = cumulative_.size();
        double p = std::pow(r_, static_cast<double>(k)) / (static_cast<double>(k) * norm_);
        double cdf = cumulative_.back();
        while (true) {
            p *= r_ * static_cast<double>(k) / static_cast<double>(k + 1);
            ++k;
            double next = cdf + p;
            if (u < next || next == cdf)
                return k;
            cdf = next;
        }
    }

  private:
    double r_ = 0.0;
    double norm_ = 0.0;
    std::vector<double> cumulative_;
};

} // namespace loopsoup
