#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "bode/grid.hpp"

namespace bode {

// Running utility statistics at one design location (Welford one-pass form;
// m2 is the sum of squared deviations, so m2/(n-1) is the sample variance).
struct ParticleStats {
    std::int64_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double u) {
        ++n;
        const double d1 = u - mean;
        mean += d1 / static_cast<double>(n);
        m2 += d1 * (u - mean);
    }

    double variance() const {
        return n > 1 ? m2 / static_cast<double>(n - 1) : std::numeric_limits<double>::quiet_NaN();
    }
};

struct TopDesignRow {
    DesignLocation location;
    std::vector<double> design;
    double mean = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::int64_t n = 0;
};

// Weight floor added after the min-shift so the lowest retained design keeps
// a strictly positive sampling probability.
inline constexpr double kWeightFloor = 1e-12;

// Sparse particle distribution over visited design locations. Entries are
// stored in first-visit order; the active set and its cumulative weights are
// rebuilt by refresh_weights and stay frozen between refreshes, so sampling
// within a batch sees one consistent snapshot.
class ParticleSystem {
public:
    struct Entry {
        DesignLocation location;
        ParticleStats stats;
        double weight = 0.0;  // active weight; 0 when outside the retained set
    };

    ParticleSystem() = default;
    explicit ParticleSystem(TimeGrid grid) : grid_(grid) { grid_.validate(); }

    const TimeGrid& grid() const { return grid_; }
    const std::vector<Entry>& entries() const { return entries_; }
    std::size_t visited() const { return entries_.size(); }

    // Schedule position, persisted in checkpoints: next (step, iteration).
    int step_index = 0;
    std::int64_t iter_in_step = 0;
    std::int64_t evaluations = 0;

    // Record one utility value at loc (loc must be canonical).
    void record(const DesignLocation& loc, double u) {
        if (!std::isfinite(u)) throw std::runtime_error("non-finite utility value rejected");
        auto [it, inserted] = index_.try_emplace(loc, static_cast<std::uint32_t>(entries_.size()));
        if (inserted) entries_.push_back(Entry{loc, {}, 0.0});
        entries_[it->second].stats.add(u);
        ++evaluations;
    }

    const ParticleStats* stats_at(const DesignLocation& loc) const {
        const Entry* e = entry_at(loc);
        return e ? &e->stats : nullptr;
    }

    const Entry* entry_at(const DesignLocation& loc) const {
        auto it = index_.find(loc);
        return it == index_.end() ? nullptr : &entries_[it->second];
    }

    // Rebuild the active set: the ceil(alpha*V) visited locations with the
    // largest means, ties at the cut all retained. Retained weights are the
    // means shifted by the minimum visited mean plus a small floor.
    void refresh_weights(double alpha) {
        if (!(alpha > 0.0 && alpha <= 1.0)) throw std::domain_error("alpha must be in (0,1]");
        const std::size_t v = entries_.size();
        if (v == 0) throw std::logic_error("refresh_weights: no visited locations");

        scratch_.resize(v);
        for (std::size_t i = 0; i < v; ++i) scratch_[i] = entries_[i].stats.mean;
        const double min_mean = *std::min_element(scratch_.begin(), scratch_.end());

        const auto retain = static_cast<std::size_t>(std::ceil(alpha * static_cast<double>(v)));
        double cut;
        if (retain >= v) {
            cut = min_mean;
        } else {
            auto nth = scratch_.begin() + static_cast<std::ptrdiff_t>(v - retain);
            std::nth_element(scratch_.begin(), nth, scratch_.end());
            cut = *nth;
        }

        active_.clear();
        cumulative_.clear();
        double total = 0.0;
        for (std::uint32_t i = 0; i < v; ++i) {
            auto& e = entries_[i];
            if (e.stats.mean >= cut) {
                e.weight = e.stats.mean - min_mean + kWeightFloor;
                total += e.weight;
                active_.push_back(i);
                cumulative_.push_back(total);
            } else {
                e.weight = 0.0;
            }
        }
    }

    bool has_active() const { return !active_.empty(); }
    std::size_t active_count() const { return active_.size(); }

    // Draw an entry index from Cat(active weights). Read-only; safe to call
    // concurrently between refreshes.
    template <typename Rng>
    std::uint32_t sample_active(Rng& rng) const {
        if (active_.empty()) throw std::logic_error("sample_active: no active weights");
        const double total = cumulative_.back();
        std::uniform_real_distribution<double> unif(0.0, total);
        const double u = unif(rng);
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        if (it == cumulative_.end()) --it;
        return active_[static_cast<std::size_t>(it - cumulative_.begin())];
    }

    // Highest-mean active location; ties broken by lexicographically
    // smallest location so results are reproducible.
    const Entry& best_active() const {
        if (active_.empty()) throw std::logic_error("best_active: no active weights");
        const Entry* best = &entries_[active_[0]];
        for (auto i : active_) {
            const Entry& e = entries_[i];
            if (e.stats.mean > best->stats.mean ||
                (e.stats.mean == best->stats.mean && e.location < best->location))
                best = &e;
        }
        return *best;
    }

    TopDesignRow row_for(const Entry& e) const {
        TopDesignRow row;
        row.location = e.location;
        row.design = location_to_design(grid_, e.location);
        row.mean = e.stats.mean;
        row.n = e.stats.n;
        if (e.stats.n > 1) {
            const double half =
                1.96 * std::sqrt(e.stats.variance() / static_cast<double>(e.stats.n));
            row.ci_low = e.stats.mean - half;
            row.ci_high = e.stats.mean + half;
        } else {
            row.ci_low = -std::numeric_limits<double>::infinity();
            row.ci_high = std::numeric_limits<double>::infinity();
        }
        return row;
    }

    // Top designs by mean with normal-theory 95% intervals; n <= 1 rows get
    // unbounded intervals.
    std::vector<TopDesignRow> top_designs(std::size_t count) const {
        if (count < 1) throw std::domain_error("top_designs: count must be >= 1");
        std::vector<const Entry*> order;
        order.reserve(entries_.size());
        for (const auto& e : entries_) order.push_back(&e);
        const auto cmp = [](const Entry* a, const Entry* b) {
            if (a->stats.mean != b->stats.mean) return a->stats.mean > b->stats.mean;
            return a->location < b->location;
        };
        if (order.size() > count) {
            std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count),
                              order.end(), cmp);
            order.resize(count);
        } else {
            std::sort(order.begin(), order.end(), cmp);
        }

        std::vector<TopDesignRow> rows;
        rows.reserve(order.size());
        for (const Entry* e : order) rows.push_back(row_for(*e));
        return rows;
    }

    // Used by checkpoint loading: append an entry with known statistics.
    void restore_entry(DesignLocation loc, std::int64_t n, double mean, double m2, double weight) {
        auto [it, inserted] = index_.try_emplace(loc, static_cast<std::uint32_t>(entries_.size()));
        if (!inserted) throw std::runtime_error("duplicate location in checkpoint");
        entries_.push_back(Entry{std::move(loc), ParticleStats{n, mean, m2}, weight});
        if (weight > 0.0) {
            active_.push_back(it->second);
            cumulative_.push_back((cumulative_.empty() ? 0.0 : cumulative_.back()) + weight);
        }
    }

private:
    TimeGrid grid_;
    std::vector<Entry> entries_;
    std::unordered_map<DesignLocation, std::uint32_t, LocationHash> index_;
    std::vector<std::uint32_t> active_;
    std::vector<double> cumulative_;
    std::vector<double> scratch_;
};

}  // namespace bode
