#pragma once

#include "equitax/auction.hpp"
#include "equitax/ledger.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace equitax {

/// Self-assessed property: the owner posts a price, pays tax on it, and
/// lives with a small yearly chance that an option to buy at that price is
/// auctioned off. The lottery rate exceeds the tax rate; the margin rewards
/// accurate pricing and covers auction costs.
struct PostedProperty {
    HolderId owner = 0;
    Money posted_price;
    Money true_value;  // simulation-internal; the mechanism never reads it
    Rate tax_rate{Decimal::parse("0.02")};
    Rate lottery_rate{Decimal::parse("0.025")};

    void validate() const {
        if (posted_price.value <= Decimal(0))
            throw DomainError("posted price must be positive");
        if (lottery_rate.value < tax_rate.value)
            throw DomainError("lottery rate must be at least the tax rate");
    }
};

/// Bidder pool for a triggered option auction: private values drawn
/// uniformly in true_value * [1-dispersion, 1+dispersion].
struct OptionAuctionSetup {
    int n_bidders = 4;
    double dispersion = 0.1;
};

struct PropertyStepOutcome {
    Money tax;
    bool triggered = false;
    bool exercised = false;
    Money option_payment;  // Vickrey second price, revenue to the authority
    Money owner_loss;      // true value minus posted price when taken; may be negative
};

/// One period of the stochastic property tax. The cash levy accrues
/// linearly in dt (money has no compounding base inside a step, unlike
/// share dilution); the lottery compounds so that sub-year steps compose.
/// When the lottery fires, bidders bid the intrinsic value of the buy
/// option; the winner pays the second-highest bid and exercises whenever
/// their private value exceeds the posted price.
inline PropertyStepOutcome property_tax_step(const PostedProperty& prop, const Decimal& dt_years,
                                             std::mt19937_64& rng, const OptionAuctionSetup& setup,
                                             const Decimal& timestamp, TaxEventLog& log) {
    prop.validate();
    if (dt_years <= Decimal(0)) throw DomainError("property tax step needs dt > 0");

    PropertyStepOutcome out;
    out.tax = Money(prop.posted_price.value * prop.tax_rate.value * dt_years);
    log.append({timestamp, TaxEventKind::PropertyTax, out.tax, Shares(), 0, prop.owner});

    const double p_trigger =
        1.0 - std::pow(1.0 - prop.lottery_rate.value.to_double(), dt_years.to_double());
    out.triggered = std::bernoulli_distribution(p_trigger)(rng);
    if (!out.triggered) return out;

    std::uniform_real_distribution<double> u(1.0 - setup.dispersion, 1.0 + setup.dispersion);
    std::vector<VickreyBid> bids;
    for (int b = 0; b < setup.n_bidders; ++b) {
        const Money value(Decimal::from_double(prop.true_value.value.to_double() * u(rng)));
        if (value > prop.posted_price)
            bids.push_back({static_cast<HolderId>(b + 1), value - prop.posted_price});
    }
    const auto winner = vickrey_option_auction(bids);
    if (!winner) return out;  // nobody values it above the posted price

    out.exercised = true;
    out.option_payment = winner->payment;
    out.owner_loss = prop.true_value - prop.posted_price;
    log.append({timestamp, TaxEventKind::AuctionProceeds, out.option_payment, Shares(), 0, prop.owner});
    return out;
}

struct PostingStrategyCost {
    Decimal multiplier;              // posted price as a multiple of true value
    double mc_annual_cost = 0.0;     // Monte Carlo mean owner cost per year
    double mc_std_error = 0.0;       // standard error of that mean
    double oracle_annual_cost = 0.0; // closed-form expectation
    double mean_takings = 0.0;       // option exercises per simulated ownership
};

/// Closed-form expected owner cost per year of posting at multiplier m:
/// tax on the posted price plus the expected loss from selling at the
/// posted price when the option lottery fires and the winning bidder is in
/// the money. Overposting can even profit on the sale; the tax makes it a
/// losing strategy anyway.
inline double posting_cost_oracle(double multiplier, double true_value, double tax_rate,
                                  double lottery_rate, const OptionAuctionSetup& setup) {
    const double posted = multiplier * true_value;
    const double lo = 1.0 - setup.dispersion;
    const double hi = 1.0 + setup.dispersion;
    double below = (multiplier - lo) / (hi - lo);  // P(one bidder value <= posted)
    below = std::min(1.0, std::max(0.0, below));
    const double p_exercise = 1.0 - std::pow(below, setup.n_bidders);
    return tax_rate * posted + lottery_rate * p_exercise * (true_value - posted);
}

/// Monte Carlo owner-cost table over posting multipliers. Ownership runs
/// `years` annual steps; a taken property is replaced at true value and the
/// owner keeps posting with the same multiplier.
inline std::vector<PostingStrategyCost> underpricing_penalty_experiment(
    const Money& true_value, const std::vector<Decimal>& multipliers, const Rate& tax_rate,
    const Rate& lottery_rate, const OptionAuctionSetup& setup, int years, int n_paths,
    std::uint64_t seed) {
    if (years < 1 || n_paths < 1) throw DomainError("experiment needs years >= 1 and paths >= 1");
    std::vector<PostingStrategyCost> table;
    table.reserve(multipliers.size());
    for (std::size_t mi = 0; mi < multipliers.size(); ++mi) {
        PostedProperty prop;
        prop.owner = 1;
        prop.true_value = true_value;
        prop.posted_price = Money(true_value.value * multipliers[mi]);
        prop.tax_rate = tax_rate;
        prop.lottery_rate = lottery_rate;

        std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ULL * (mi + 1));
        double sum = 0.0, sum_sq = 0.0;
        long takings = 0;
        TaxEventLog scratch;
        for (int path = 0; path < n_paths; ++path) {
            Decimal cost;
            for (int y = 0; y < years; ++y) {
                const auto step = property_tax_step(prop, Decimal(1), rng, setup, Decimal(y), scratch);
                cost += step.tax.value;
                if (step.exercised) {
                    cost += step.owner_loss.value;
                    ++takings;
                }
            }
            const double annual = cost.to_double() / years;
            sum += annual;
            sum_sq += annual * annual;
        }
        PostingStrategyCost row;
        row.multiplier = multipliers[mi];
        row.mc_annual_cost = sum / n_paths;
        const double var = std::max(0.0, sum_sq / n_paths - row.mc_annual_cost * row.mc_annual_cost);
        row.mc_std_error = std::sqrt(var / n_paths);
        row.oracle_annual_cost =
            posting_cost_oracle(multipliers[mi].to_double(), true_value.value.to_double(),
                                tax_rate.value.to_double(), lottery_rate.value.to_double(), setup);
        row.mean_takings = static_cast<double>(takings) / n_paths;
        table.push_back(row);
    }
    return table;
}

} // namespace equitax
