#pragma once

#include "equitax/conversion.hpp"
#include "equitax/deferred.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

namespace equitax {

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 over seed xor stream index
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

struct EconomyConfig {
    int n_firms = 2;
    Decimal horizon_years{10};
    Decimal dt{1};
    RegimeParams params;
    ReturnProcess process{0.06, 0.0};
    Decimal initial_equity_fraction{0};  // leading firms start equity-taxed
    Decimal favored_fraction{0};         // trailing income-taxed firms get relief
    Rate favored_tax_relief{Decimal::parse("0.5")};
    Decimal auction_cadence_years{1};
    Rate interest_rate{Decimal::parse("0.04")};
    std::uint64_t seed = 1;
    IncomeSplit split{Rate::parse("0.1"), Rate::parse("0.2"), Rate::parse("0.6"),
                      Rate::parse("0.1")};
    RealizationPolicy realization = RealizationPolicy::annual();
    // Productivity of each use of a dollar of income. Reinvestment through
    // the books beats payout; masked reinvestment burns part of the dollar
    // on looking like an expense.
    Decimal reinvest_efficiency{Decimal::parse("1.05")};
    Decimal masked_efficiency{Decimal::parse("0.9")};
    bool dividends_reinvested = true;
    Money initial_price{Decimal(100)};
    Shares initial_shares{Decimal(1000)};
    Decimal initial_basis_discount{0};  // founding lots carry price x (1-discount) as basis
    double max_step_return = 10.0;  // volatility cap; losses floor at -95%
    Decimal conversion_switch_margin{Decimal::parse("0.002")};  // burden gap hurdle per year

    void validate() const {
        if (n_firms < 1) throw DomainError("economy needs at least one firm");
        if (dt <= Decimal(0)) throw DomainError("dt must be positive");
        if (horizon_years < Decimal(0)) throw DomainError("horizon must be non-negative");
        if (horizon_years.mantissa() % dt.mantissa() != 0)
            throw DomainError("dt must divide the horizon");
        if (auction_cadence_years.mantissa() % dt.mantissa() != 0)
            throw DomainError("auction cadence must be a multiple of dt");
        params.validate();
        split.validate();
        if (initial_price.value <= Decimal(0) || initial_shares.count <= Decimal(0))
            throw DomainError("initial price and share count must be positive");
    }
};

struct Holder {
    HolderId id = 0;
    Money cash;
};

struct EconomyState {
    Decimal clock;
    std::vector<Firm> firms;
    std::vector<bool> favored;
    std::vector<ShareLot> lots;
    std::vector<Holder> holders;  // one household per firm, market absorber last
    TaxEventLog log;
    std::mt19937_64 rng;

    HolderId household_of(FirmId firm) const { return firm; }
    HolderId market_holder() const { return static_cast<HolderId>(firms.size() + 1); }

    Holder& holder(HolderId id) {
        for (auto& h : holders)
            if (h.id == id) return h;
        throw InvariantError("unknown holder id " + std::to_string(id));
    }

    Money wealth_of(HolderId id) const {
        Money w;
        for (const auto& h : holders)
            if (h.id == id) w += h.cash;
        for (const auto& lot : lots)
            if (lot.holder == id) w += lot.quantity * firms.at(lot.firm - 1).price_per_share;
        return w;
    }
};

inline EconomyState make_economy(const EconomyConfig& cfg) {
    cfg.validate();
    EconomyState st;
    st.rng.seed(cfg.seed);
    const int n_equity = static_cast<int>(
        std::llround((cfg.initial_equity_fraction * Decimal(cfg.n_firms)).to_double()));
    const int n_favored = static_cast<int>(
        std::llround((cfg.favored_fraction * Decimal(cfg.n_firms)).to_double()));
    for (int i = 0; i < cfg.n_firms; ++i) {
        Firm f;
        f.id = static_cast<FirmId>(i + 1);
        f.regime = i < n_equity ? Regime::EquityTaxed : Regime::IncomeTaxed;
        f.shares_outstanding = cfg.initial_shares;
        f.price_per_share = cfg.initial_price;
        f.pretax_return = cfg.process;
        f.income_split = cfg.split;
        st.firms.push_back(f);
        st.favored.push_back(i >= cfg.n_firms - n_favored && f.regime == Regime::IncomeTaxed);
        const Money basis(cfg.initial_price.value * (Decimal(1) - cfg.initial_basis_discount));
        st.lots.push_back({st.household_of(f.id), f.id, cfg.initial_shares, basis, Money()});
        st.holders.push_back({st.household_of(f.id), Money()});
    }
    st.holders.push_back({st.market_holder(), Money()});
    return st;
}

namespace detail {

inline bool on_boundary(const Decimal& t, const Decimal& step) {
    return t.mantissa() % step.mantissa() == 0;
}

inline bool realization_due(const RealizationPolicy& policy, const Decimal& t,
                            const Decimal& horizon) {
    switch (policy.mode) {
        case RealizationPolicy::Mode::Annual:
            return t.is_integer();
        case RealizationPolicy::Mode::EveryNYears:
            return t.is_integer() &&
                   (t.mantissa() / Decimal::unit()) % policy.n == 0;
        case RealizationPolicy::Mode::DeferToHorizon:
            return t == horizon;
    }
    return false;
}

inline Money ceil_to_cover(const Shares& supply, const Money& price) {
    // Smallest 12-digit amount whose share demand at `price` covers supply.
    BigInt num = supply.count.mantissa() * price.value.mantissa();
    BigInt q = num / Decimal::unit();
    if (q * Decimal::unit() != num) ++q;
    return Money(Decimal::from_mantissa(q));
}

} // namespace detail

/// After a realization every surviving lot of the firm shares one basis, so
/// holders' fragments can be folded together to keep the lot list short.
inline void merge_realized_lots(EconomyState& st, const Firm& firm) {
    for (std::size_t i = 0; i < st.lots.size(); ++i) {
        if (st.lots[i].firm != firm.id) continue;
        for (std::size_t j = st.lots.size(); j-- > i + 1;) {
            const ShareLot& other = st.lots[j];
            if (other.firm != firm.id || other.holder != st.lots[i].holder) continue;
            if (other.purchase_price_per_share != st.lots[i].purchase_price_per_share ||
                other.reinvested_after_acquisition_per_share !=
                    st.lots[i].reinvested_after_acquisition_per_share)
                continue;
            st.lots[i].quantity += other.quantity;
            st.lots.erase(st.lots.begin() + static_cast<std::ptrdiff_t>(j));
        }
    }
}

/// Sells a firm's accrued shares to the market absorber at fundamental
/// value through the regular auction engine. Proceeds are authority cash.
inline void auction_accrued_shares(EconomyState& st, Firm& firm, const Decimal& timestamp) {
    if (firm.irs_accrued.is_zero()) return;
    const Money price = firm.price_per_share;
    const std::vector<Bid> bids{
        {st.market_holder(), price, detail::ceil_to_cover(firm.irs_accrued, price)}};
    const AuctionResult res = clear_auction(firm.irs_accrued, bids);
    for (const auto& a : res.allocations) {
        st.lots.push_back({a.bidder, firm.id, a.shares, res.clearing_price, Money()});
        st.holder(a.bidder).cash -= a.dollars_paid;
    }
    firm.irs_accrued = res.unsold;
    st.log.append({timestamp, TaxEventKind::AuctionProceeds, res.proceeds, Shares(), firm.id,
                   kTaxAuthority});
}

/// One period: draw pre-tax income, apply the regime (share accrual or the
/// income-tax cascade), update value, distribute dividends to post-accrual
/// holders (the authority's accrued shares collect cash distributions),
/// realize gains on schedule, reinvest dividends at fair value, and run the
/// share auctions on cadence boundaries.
inline void step_economy(EconomyState& st, const EconomyConfig& cfg) {
    const Decimal t_next = st.clock + cfg.dt;
    const double dt_d = cfg.dt.to_double();

    for (std::size_t fi = 0; fi < st.firms.size(); ++fi) {
        Firm& firm = st.firms[fi];
        const double z = std::normal_distribution<double>{}(st.rng);
        double g = firm.pretax_return.drift * dt_d +
                   firm.pretax_return.volatility * std::sqrt(dt_d) * z;
        g = std::min(std::max(g, -0.95), cfg.max_step_return);
        const Money income_ps(firm.price_per_share.value * Decimal::from_double(g));

        Money dividends_ps;
        Money value_added_ps;
        if (firm.regime == Regime::EquityTaxed) {
            equity_tax_step(firm, st.lots, cfg.params.equity_tax_rate, cfg.dt, t_next, st.log);
            if (income_ps.value > Decimal(0)) {
                const IncomeSplit& s = firm.income_split;
                dividends_ps = income_ps * s.dividends;
                const Money reinv = income_ps * s.reinvestment;
                value_added_ps = Money(reinv.value * cfg.reinvest_efficiency) +
                                 Money((income_ps * s.masked).value * cfg.masked_efficiency);
                firm.cumulative_after_tax_reinvested_per_share += reinv;
                for (auto& lot : st.lots)
                    if (lot.firm == firm.id) lot.reinvested_after_acquisition_per_share += reinv;
            } else {
                value_added_ps = income_ps;
            }
        } else {
            RegimeParams p = cfg.params;
            if (st.favored[fi])
                p.income_tax_rate =
                    Rate(p.income_tax_rate.value * cfg.favored_tax_relief.complement());
            const IncomeStepResult r = split_income(income_ps, firm.income_split, p.income_tax_rate);
            dividends_ps = r.dividends_paid;
            value_added_ps = Money(r.after_tax_reinvested.value * cfg.reinvest_efficiency) +
                             Money(r.masked_reinvested.value * cfg.masked_efficiency) + r.loss;
            if (!r.corporate_tax.value.is_zero()) {
                const Money total(r.corporate_tax.value * firm.shares_outstanding.count);
                st.log.append({t_next, TaxEventKind::IncomeTax, total, Shares(), firm.id,
                               kTaxAuthority});
            }
            firm.cumulative_after_tax_reinvested_per_share += r.after_tax_reinvested;
            if (!r.after_tax_reinvested.value.is_zero())
                for (auto& lot : st.lots)
                    if (lot.firm == firm.id)
                        lot.reinvested_after_acquisition_per_share += r.after_tax_reinvested;
        }
        firm.price_per_share += value_added_ps;
        if (firm.price_per_share.value <= Decimal(0))
            throw InvariantError("firm value collapsed to zero");

        if (dividends_ps.value > Decimal(0)) {
            std::vector<std::pair<HolderId, Money>> reinvest_queue;
            for (auto& lot : st.lots) {
                if (lot.firm != firm.id || lot.quantity.is_zero()) continue;
                Money amount = lot.quantity * dividends_ps;
                st.holder(lot.holder).cash += amount;
                if (firm.regime == Regime::IncomeTaxed) {
                    const Money tax = dividend_tax(amount, cfg.params, t_next, firm.id,
                                                   lot.holder, st.log);
                    st.holder(lot.holder).cash -= tax;
                    amount -= tax;
                }
                if (cfg.dividends_reinvested) reinvest_queue.emplace_back(lot.holder, amount);
            }
            if (!firm.irs_accrued.is_zero()) {
                const Money authority_cut = firm.irs_accrued * dividends_ps;
                st.log.append({t_next, TaxEventKind::DividendTax, authority_cut, Shares(),
                               firm.id, kTaxAuthority});
            }
            // Dividend reinvestment is fair-value issuance: the cash flows
            // back in, the share count grows, the price is untouched.
            for (const auto& [holder_id, amount] : reinvest_queue) {
                if (amount.value <= Decimal(0)) continue;
                const Shares bought = shares_bought(amount, firm.price_per_share);
                firm.shares_outstanding += bought;
                st.lots.push_back({holder_id, firm.id, bought, firm.price_per_share, Money()});
                st.holder(holder_id).cash -= amount;
            }
        }
    }

    // Scheduled capital-gains realization for income-taxed holdings.
    for (std::size_t fi = 0; fi < st.firms.size(); ++fi) {
        Firm& firm = st.firms[fi];
        if (firm.regime != Regime::IncomeTaxed) continue;
        if (!detail::realization_due(cfg.realization, t_next, cfg.horizon_years)) continue;
        for (auto& lot : st.lots) {
            if (lot.firm != firm.id || lot.quantity.is_zero()) continue;
            const Money tax = realize_lot_gains(lot, firm.price_per_share, cfg.params, t_next, st.log);
            st.holder(lot.holder).cash -= tax;
        }
        merge_realized_lots(st, firm);
    }

    if (detail::on_boundary(t_next, cfg.auction_cadence_years))
        for (auto& firm : st.firms)
            if (firm.regime == Regime::EquityTaxed) auction_accrued_shares(st, firm, t_next);

    for (const auto& firm : st.firms) check_share_conservation(firm, st.lots);
    st.clock = t_next;
}

using StepObserver = std::function<void(const EconomyState&, int step_index)>;

inline EconomyState run_economy(const EconomyConfig& cfg, const StepObserver& observe = {}) {
    EconomyState st = make_economy(cfg);
    const long long steps =
        (cfg.horizon_years / cfg.dt).mantissa().convert_to<long long>() /
        Decimal::unit().convert_to<long long>();
    if (observe) observe(st, 0);
    for (long long k = 0; k < steps; ++k) {
        step_economy(st, cfg);
        if (observe) observe(st, static_cast<int>(k + 1));
    }
    return st;
}

} // namespace equitax
