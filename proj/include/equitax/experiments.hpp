#pragma once

#include "equitax/sim.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace equitax {

/// One-period-ahead quote: expected per-share payoff next period, net of the
/// regime's expected taxes, capitalized at the interest rate. Consistent
/// multi-period valuation being out of reach, the simulator prices myopically
/// and says so; burdens and report prices use this quote, while wealth
/// accounting stays at fundamental value.
inline Money myopic_quote(const Firm& firm, const EconomyConfig& cfg, bool favored = false) {
    const Decimal dt = cfg.dt;
    const Decimal mu = Decimal::from_double(firm.pretax_return.drift) * dt;
    const Money b = firm.price_per_share;
    const Money expected_income(b.value * mu);
    const IncomeSplit& s = firm.income_split;

    Money payoff = b;
    if (firm.regime == Regime::EquityTaxed) {
        payoff += Money((expected_income * s.reinvestment).value * cfg.reinvest_efficiency);
        payoff += Money((expected_income * s.masked).value * cfg.masked_efficiency);
        payoff += expected_income * s.dividends;
        const Decimal shed = Decimal(1) - Decimal::pow(cfg.params.equity_tax_rate.complement(), dt);
        payoff -= Money(b.value * shed);
    } else {
        Rate t = cfg.params.income_tax_rate;
        if (favored) t = Rate(t.value * cfg.favored_tax_relief.complement());
        const IncomeStepResult r = split_income(expected_income, s, t);
        payoff += Money(r.after_tax_reinvested.value * cfg.reinvest_efficiency);
        payoff += Money(r.masked_reinvested.value * cfg.masked_efficiency);
        payoff += r.dividends_paid * cfg.params.dividend_rate.complement();
    }
    const Decimal discount = Decimal(1) + cfg.interest_rate.value * dt;
    return Money(payoff.value / discount);
}

/// Expected tax per dollar of firm value per year, the paper's notion of
/// burden. The equity tax burden is the rate itself; the income-tax burden
/// folds the corporate take, the dividend tax, and the capital-gains drag
/// on retained growth.
inline Decimal income_tax_burden(const IncomeSplit& s, double drift, const RegimeParams& params,
                                 const Rate& effective_corporate, const EconomyConfig& cfg) {
    const Decimal mu = Decimal::from_double(drift);
    const Decimal t = effective_corporate.value;
    const Decimal corporate = t * (s.dividends.value + s.reinvestment.value) * mu;
    const Decimal dividend =
        params.dividend_rate.value * s.dividends.value * (Decimal(1) - t) * mu;
    const Decimal retained_growth =
        (cfg.reinvest_efficiency * s.reinvestment.value * (Decimal(1) - t) +
         cfg.masked_efficiency * s.masked.value) * mu;
    const Decimal capgains = params.capgains_rate.value * retained_growth;
    return corporate + dividend + capgains;
}

// ---------------------------------------------------------------------------
// Neutrality of the argmax (strategy grid)
// ---------------------------------------------------------------------------

struct StrategyCell {
    Rate dividends;
    Rate masked;
};

struct ArgmaxOutcome {
    std::size_t pretax = 0;
    std::size_t equity = 0;
    std::size_t income = 0;
    bool equity_matches = false;
    bool income_diverges = false;
};

/// Builds the d x m grid with fixed expenses; reinvestment absorbs the rest.
inline std::vector<StrategyCell> strategy_grid(int side, const Decimal& step,
                                               const Decimal& expenses) {
    std::vector<StrategyCell> grid;
    for (int di = 0; di < side; ++di)
        for (int mi = 0; mi < side; ++mi) {
            const Decimal d = step * Decimal(di);
            const Decimal m = step * Decimal(mi);
            if (expenses + d + m > Decimal(1)) throw DomainError("strategy grid leaves no income");
            grid.push_back({Rate(d), Rate(m)});
        }
    return grid;
}

/// Runs one seeded economy per strategy under three tax treatments — none,
/// equity, income — with common random draws, and compares the argmax of
/// final holder wealth. Under the equity tax the net ranking reproduces the
/// pre-tax ranking: the dilution multiplies every strategy's wealth by the
/// same factor. Under the income tax the masked channel buys tax relief at
/// an efficiency loss the pre-tax ranking never accepts.
inline ArgmaxOutcome argmax_neutrality_economy(const EconomyConfig& base,
                                               const std::vector<StrategyCell>& grid,
                                               std::uint64_t economy_seed) {
    const auto run_one = [&](const StrategyCell& cell, Regime regime,
                             const RegimeParams& params) {
        EconomyConfig cfg = base;
        cfg.n_firms = 1;
        cfg.seed = economy_seed;
        cfg.params = params;
        cfg.initial_equity_fraction = regime == Regime::EquityTaxed ? Decimal(1) : Decimal(0);
        const Decimal r = Decimal(1) - base.split.expenses.value - cell.dividends.value -
                          cell.masked.value;
        cfg.split = {base.split.expenses, cell.dividends, Rate(r), cell.masked};
        const EconomyState end = run_economy(cfg);
        return end.wealth_of(end.household_of(1));
    };

    RegimeParams none = RegimeParams::zero();
    RegimeParams equity_only = RegimeParams::zero();
    equity_only.equity_tax_rate = base.params.equity_tax_rate;
    RegimeParams income_side = base.params;
    income_side.equity_tax_rate = Rate();

    std::vector<Money> w_pre, w_eq, w_inc;
    for (const auto& cell : grid) {
        w_pre.push_back(run_one(cell, Regime::EquityTaxed, none));
        w_eq.push_back(run_one(cell, Regime::EquityTaxed, equity_only));
        w_inc.push_back(run_one(cell, Regime::IncomeTaxed, income_side));
    }
    const auto argmax = [](const std::vector<Money>& w) {
        return static_cast<std::size_t>(
            std::max_element(w.begin(), w.end()) - w.begin());
    };
    ArgmaxOutcome out;
    out.pretax = argmax(w_pre);
    out.equity = argmax(w_eq);
    out.income = argmax(w_inc);
    out.equity_matches = out.equity == out.pretax;
    out.income_diverges = out.income != out.pretax;
    return out;
}

struct NeutralityReport {
    int economies = 0;
    int equity_matches = 0;
    int income_divergences = 0;
};

inline NeutralityReport argmax_neutrality_experiment(const EconomyConfig& base,
                                                     const std::vector<StrategyCell>& grid,
                                                     int n_economies) {
    NeutralityReport rep;
    rep.economies = n_economies;
    for (int k = 0; k < n_economies; ++k) {
        const auto out = argmax_neutrality_economy(base, grid, mix_seed(base.seed, k));
        rep.equity_matches += out.equity_matches ? 1 : 0;
        rep.income_divergences += out.income_diverges ? 1 : 0;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Transition: who converts, and when
// ---------------------------------------------------------------------------

struct TransitionRow {
    Decimal time;
    double fraction_converted = 0.0;
    double mean_income_burden = 0.0;
    double equity_burden = 0.0;
};

struct TransitionTrace {
    std::vector<TransitionRow> rows;
    int first_conversion_step = -1;
    std::vector<bool> converted;  // per firm, at the horizon
};

/// Analytic payback horizon: one-time conversion cost (the recaptured gain)
/// over the annual burden gap. Firms convert greedily when the remaining
/// horizon repays the cost plus the switching margin.
inline double conversion_payback_years(double cost_fraction, double burden_gap) {
    if (burden_gap <= 0.0) return std::numeric_limits<double>::infinity();
    return cost_fraction / burden_gap;
}

inline TransitionTrace transition_experiment(const EconomyConfig& cfg) {
    EconomyState st = make_economy(cfg);
    TransitionTrace trace;
    trace.converted.assign(st.firms.size(), false);
    const long long steps =
        (cfg.horizon_years / cfg.dt).mantissa().convert_to<long long>() /
        Decimal::unit().convert_to<long long>();

    for (long long k = 0; k < steps; ++k) {
        const Decimal remaining = cfg.horizon_years - st.clock;
        double burden_sum = 0.0;
        int burden_count = 0;
        for (std::size_t fi = 0; fi < st.firms.size(); ++fi) {
            Firm& firm = st.firms[fi];
            if (firm.regime != Regime::IncomeTaxed) continue;
            Rate eff = cfg.params.income_tax_rate;
            if (st.favored[fi]) eff = Rate(eff.value * cfg.favored_tax_relief.complement());
            const Decimal burden =
                income_tax_burden(firm.income_split, firm.pretax_return.drift, cfg.params, eff, cfg);
            burden_sum += burden.to_double();
            ++burden_count;
            const Decimal gap = burden - cfg.params.equity_tax_rate.value;
            if (gap <= cfg.conversion_switch_margin) continue;

            Money basis_total;
            for (const auto& lot : st.lots)
                if (lot.firm == firm.id)
                    basis_total += Money(lot.quantity.count * lot.cost_basis_per_share().value);
            const Money value = firm.market_value();
            Money gain = value - basis_total;
            if (gain.value < Decimal(0)) gain = Money();
            const Decimal cost_fraction =
                (gain * cfg.params.income_tax_rate).value / value.value;
            if (remaining * (gap - cfg.conversion_switch_margin) <= cost_fraction) continue;

            // Convert: credit bids plus pegged outside demand at the diluted price.
            const Money post(firm.price_per_share.value * cfg.params.income_tax_rate.complement());
            const Shares supply(Decimal::mul_div(firm.shares_outstanding.count,
                                                 cfg.params.income_tax_rate.value,
                                                 cfg.params.income_tax_rate.complement()));
            const std::vector<Bid> outside{
                {st.market_holder(), post, detail::ceil_to_cover(supply, post)}};
            const ConversionOutcome out = convert_to_equity(
                firm, st.lots, cfg.params.income_tax_rate, firm.price_per_share, outside,
                st.clock, st.log);
            settle_outside_allocations(out, firm, out.credit_bid_count, st.lots);
            st.holder(st.market_holder()).cash -= out.irs_proceeds;
            trace.converted[fi] = true;
            if (trace.first_conversion_step < 0)
                trace.first_conversion_step = static_cast<int>(k);
        }

        step_economy(st, cfg);

        TransitionRow row;
        row.time = st.clock;
        int converted_count = 0;
        for (bool c : trace.converted) converted_count += c ? 1 : 0;
        row.fraction_converted =
            static_cast<double>(converted_count) / static_cast<double>(st.firms.size());
        row.mean_income_burden = burden_count > 0 ? burden_sum / burden_count : 0.0;
        row.equity_burden = cfg.params.equity_tax_rate.value.to_double();
        trace.rows.push_back(row);
    }
    return trace;
}

// ---------------------------------------------------------------------------
// Revenue-neutral equity tax rate
// ---------------------------------------------------------------------------

struct RevenueNeutralResult {
    Rate tau;
    Money income_revenue;   // pre-reform baseline, all firms income-taxed
    Money equity_revenue;   // at the returned rate, all firms equity-taxed
    int iterations = 0;
};

/// Bisects the equity tax rate until an all-equity economy collects the same
/// revenue over the horizon as the all-income baseline, within `tolerance`
/// (relative). Revenue is monotone in the rate, so bisection is safe.
inline RevenueNeutralResult revenue_neutral_rate(const EconomyConfig& base,
                                                 double tolerance = 0.005) {
    EconomyConfig income_cfg = base;
    income_cfg.initial_equity_fraction = Decimal(0);
    const Money target = run_economy(income_cfg).log.total_cash();
    if (target.value <= Decimal(0)) throw DomainError("baseline economy collects no revenue");

    const auto revenue_at = [&](const Decimal& tau) {
        EconomyConfig cfg = base;
        cfg.initial_equity_fraction = Decimal(1);
        cfg.params.equity_tax_rate = Rate(tau);
        return run_economy(cfg).log.total_cash();
    };

    Decimal lo = Decimal::parse("0.0001");
    Decimal hi = Decimal::parse("0.2");
    RevenueNeutralResult res;
    res.income_revenue = target;
    for (int iter = 0; iter < 60; ++iter) {
        const Decimal mid = (lo + hi) / Decimal(2);
        const Money rev = revenue_at(mid);
        res.tau = Rate(mid);
        res.equity_revenue = rev;
        res.iterations = iter + 1;
        const Decimal rel = ((rev - target).value / target.value).abs();
        if (rel.to_double() <= tolerance) return res;
        if (rev < target)
            lo = mid;
        else
            hi = mid;
    }
    throw DomainError("revenue-neutral bisection did not converge; widen the bracket");
}

// ---------------------------------------------------------------------------
// Volatility exposure by regime
// ---------------------------------------------------------------------------

struct VolatilityRow {
    double sigma = 0.0;
    double std_income = 0.0;
    double std_equity = 0.0;
    double mc_ratio = 0.0;        // income / equity net-return dispersion
    double analytic_ratio = 0.0;  // (1-t)/(1-tau)
};

/// Net one-year return dispersion under each regime, same draws. The income
/// tax scales realized gains by (1-t) and so stands between the holder and
/// fortune; the equity tax's dilution is set ex ante and leaves the holder
/// exposed, scaling only by (1-tau).
inline std::vector<VolatilityRow> volatility_experiment(const EconomyConfig& base,
                                                        const std::vector<double>& sigmas,
                                                        int n_paths) {
    std::vector<VolatilityRow> rows;
    for (std::size_t si = 0; si < sigmas.size(); ++si) {
        const auto net_return = [&](Regime regime, std::uint64_t seed) {
            EconomyConfig cfg = base;
            cfg.n_firms = 1;
            cfg.horizon_years = Decimal(1);
            cfg.dt = Decimal(1);
            cfg.auction_cadence_years = Decimal(1);
            cfg.seed = seed;
            cfg.process.volatility = sigmas[si];
            cfg.split = {Rate(), Rate(), Rate(Decimal(1)), Rate()};  // retain everything
            cfg.reinvest_efficiency = Decimal(1);
            cfg.initial_equity_fraction = regime == Regime::EquityTaxed ? Decimal(1) : Decimal(0);
            const EconomyState end = run_economy(cfg);
            const Money w = end.wealth_of(end.household_of(1));
            const Money w0 = base.initial_price * base.initial_shares.count;
            return ((w - w0).value / w0.value).to_double();
        };

        double sum_i = 0, sum_sq_i = 0, sum_e = 0, sum_sq_e = 0;
        for (int p = 0; p < n_paths; ++p) {
            const std::uint64_t seed = mix_seed(base.seed, si * 1000003ULL + p);
            const double ri = net_return(Regime::IncomeTaxed, seed);
            const double re = net_return(Regime::EquityTaxed, seed);
            sum_i += ri; sum_sq_i += ri * ri;
            sum_e += re; sum_sq_e += re * re;
        }
        VolatilityRow row;
        row.sigma = sigmas[si];
        const double n = n_paths;
        row.std_income = std::sqrt(std::max(0.0, sum_sq_i / n - (sum_i / n) * (sum_i / n)));
        row.std_equity = std::sqrt(std::max(0.0, sum_sq_e / n - (sum_e / n) * (sum_e / n)));
        row.mc_ratio = row.std_equity > 0 ? row.std_income / row.std_equity : 0.0;
        const double t = base.params.income_tax_rate.value.to_double();
        const double tau = base.params.equity_tax_rate.value.to_double();
        row.analytic_ratio = (1.0 - t) / (1.0 - tau);
        rows.push_back(row);
    }
    return rows;
}

} // namespace equitax
