#pragma once

#include "equitax/auction.hpp"
#include "equitax/regimes.hpp"

#include <vector>

namespace equitax {

/// Constant-dollar cost basis of a whole lot: (purchase price + after-tax
/// reinvested income since acquisition) per share, times the share count.
inline Money cost_basis(const ShareLot& lot) {
    return Money(lot.quantity.count * lot.cost_basis_per_share().value);
}

struct LotCredit {
    std::size_t lot_index = 0;
    Money credit;            // t x cost basis, offsets the second taxation of the basis
    Shares shares_received;  // credit settled in new shares at the clearing price
};

struct ConversionOutcome {
    Shares new_shares_issued;
    Shares auctioned;  // equals new_shares_issued; the credit fills out of the same pool
    std::vector<LotCredit> credit_shares_per_lot;
    std::size_t credit_bid_count = 0;  // credit bids precede outside bids in the auction
    Money post_price;
    Money irs_proceeds;  // cash from outside bidders only
    Money new_cost_basis_per_share;
    Shares unsold;  // parked in the firm's accrual bucket for a later auction
    AuctionResult auction;
};

/// Converts an income-taxed firm to the equity tax. The firm issues new
/// shares amounting to fraction t of the enlarged total, which dilutes the
/// price to market x (1-t). The new shares are auctioned; each existing lot
/// enters a credit bid of t x its cost basis with no price limit, so the
/// basis is not taxed twice. Outside bidders pay cash for the remainder —
/// that cash is the realized conversion tax on the accumulated gains. All
/// basis history resets to the post-conversion price.
inline ConversionOutcome convert_to_equity(Firm& firm, std::vector<ShareLot>& lots,
                                           const Rate& t, const Money& market_price,
                                           const std::vector<Bid>& outside_bids,
                                           const Decimal& timestamp, TaxEventLog& log) {
    if (firm.regime == Regime::EquityTaxed)
        throw DomainError("firm is already equity-taxed");
    if (t.value <= Decimal(0) || t.value >= Decimal(1))
        throw DomainError("conversion tax rate must lie in (0,1), got " + t.value.str());
    if (market_price.value <= Decimal(0))
        throw DomainError("market price must be positive");

    firm.price_per_share = market_price;
    ConversionOutcome out;
    out.new_shares_issued = issue_shares(firm, t);
    out.auctioned = out.new_shares_issued;
    out.post_price = firm.price_per_share;

    // Credit bids first (one per lot), outside bids after; the allocation
    // vector in AuctionResult is positional over this combined list.
    std::vector<Bid> bids;
    std::vector<std::size_t> credit_lot(0);
    for (std::size_t i = 0; i < lots.size(); ++i) {
        if (lots[i].firm != firm.id) continue;
        const Money credit = Money(cost_basis(lots[i]).value * t.value);
        if (credit.value <= Decimal(0)) continue;
        bids.push_back({lots[i].holder, std::nullopt, credit});
        credit_lot.push_back(i);
    }
    const std::size_t n_credit = bids.size();
    out.credit_bid_count = n_credit;
    bids.insert(bids.end(), outside_bids.begin(), outside_bids.end());

    out.auction = clear_auction(out.new_shares_issued, bids, market_price);
    out.unsold = out.auction.unsold;
    firm.irs_accrued += out.unsold;

    for (const auto& alloc : out.auction.allocations) {
        if (alloc.bid_index < n_credit) {
            const std::size_t li = credit_lot[alloc.bid_index];
            out.credit_shares_per_lot.push_back(
                {li, bids[alloc.bid_index].dollar_amount, alloc.shares});
        } else {
            out.irs_proceeds += alloc.dollars_paid;
        }
    }
    if (!out.irs_proceeds.value.is_zero())
        log.append({timestamp, TaxEventKind::ConversionTax, out.irs_proceeds, Shares(),
                    firm.id, kTaxAuthority});

    // Gains are now fully recaptured: every surviving lot starts a fresh
    // basis at the diluted price.
    out.new_cost_basis_per_share = out.post_price;
    for (auto& lot : lots) {
        if (lot.firm != firm.id) continue;
        lot.purchase_price_per_share = out.post_price;
        lot.reinvested_after_acquisition_per_share = Money();
    }
    for (const auto& c : out.credit_shares_per_lot) {
        ShareLot extra = lots[c.lot_index];
        extra.quantity = c.shares_received;
        extra.purchase_price_per_share = out.auction.clearing_price;
        extra.reinvested_after_acquisition_per_share = Money();
        lots.push_back(std::move(extra));
    }
    firm.cumulative_after_tax_reinvested_per_share = Money();
    firm.regime = Regime::EquityTaxed;
    return out;
}

/// Outside winners of a conversion auction, as fresh lots at the clearing
/// price. Kept separate from convert_to_equity so callers that only study
/// the converting holder can ignore the buyers.
inline void settle_outside_allocations(const ConversionOutcome& out, const Firm& firm,
                                       std::size_t n_credit_bids, std::vector<ShareLot>& lots) {
    for (const auto& alloc : out.auction.allocations) {
        if (alloc.bid_index < n_credit_bids) continue;
        lots.push_back({alloc.bidder, firm.id, alloc.shares, out.auction.clearing_price, Money()});
    }
}

/// Put options the authority receives when a firm reconverts to the income
/// tax: fraction t of the shares, at the strike the convert chose. The
/// strike becomes every lot's new cost basis, so inflating it hands the
/// authority in-the-money puts of equal value.
struct PutOptionGrant {
    FirmId firm = 0;
    Rate fraction;
    Money strike;
};

inline Money put_intrinsic_value(const PutOptionGrant& grant, const Money& market_price,
                                 const Shares& outstanding) {
    if (market_price >= grant.strike) return Money();
    const Money per_share = grant.strike - market_price;
    return Money((outstanding.count * grant.fraction.value) * per_share.value);
}

inline PutOptionGrant convert_to_income(Firm& firm, std::vector<ShareLot>& lots,
                                        const Rate& t, const Money& strike,
                                        const Decimal& timestamp, TaxEventLog& log) {
    if (firm.regime != Regime::EquityTaxed)
        throw DomainError("only an equity-taxed firm can reconvert to the income tax");
    if (t.value <= Decimal(0) || t.value >= Decimal(1))
        throw DomainError("conversion tax rate must lie in (0,1), got " + t.value.str());
    if (strike.value < Decimal(0)) throw DomainError("strike must be non-negative");

    PutOptionGrant grant{firm.id, t, strike};
    for (auto& lot : lots) {
        if (lot.firm != firm.id) continue;
        lot.purchase_price_per_share = strike;
        lot.reinvested_after_acquisition_per_share = Money();
    }
    firm.cumulative_after_tax_reinvested_per_share = Money();
    firm.regime = Regime::IncomeTaxed;
    (void)timestamp;
    (void)log;
    return grant;
}

/// European exercise at the chosen horizon: the authority exercises on
/// intrinsic value when the market sits below the strike.
inline Money exercise_put(const PutOptionGrant& grant, const Money& market_price,
                          const Shares& outstanding, const Decimal& timestamp, TaxEventLog& log) {
    const Money value = put_intrinsic_value(grant, market_price, outstanding);
    if (!value.value.is_zero())
        log.append({timestamp, TaxEventKind::ConversionTax, value, Shares(), grant.firm, kTaxAuthority});
    return value;
}

struct RecaptureCheckConfig {
    Rate income_tax;   // t; also the capital gains rate on the stay-put branch
    Rate equity_tax;   // tau while converted; pass t*g/(1+g) to match the annual burden
    bool recapture = true;
};

/// Holder's advantage (in dollars at the horizon) of convert -> hold ->
/// reconvert over never converting, under one deterministic per-share price
/// path sampled annually. The stay-put holder realizes gains annually at
/// rate t; the convert pays the conversion tax through dilution, is diluted
/// by tau each year, reconverts at-the-money, and exits tax-free on the
/// fresh basis. With recapture on, the advantage is a pure timing residue
/// near zero; switching recapture off lets the embedded gain escape and the
/// advantage turns strictly positive.
inline Money roundtrip_recapture_check(const Firm& firm_template, const Money& basis_per_share,
                                       const std::vector<Money>& price_path,
                                       const RecaptureCheckConfig& cfg) {
    if (price_path.size() < 2) throw DomainError("price path needs at least two annual points");
    const std::size_t horizon = price_path.size() - 1;
    const HolderId holder = 1;
    const HolderId market = 999;
    TaxEventLog scratch;

    // Branch A: stay income-taxed, realize annually.
    Money wealth_stay;
    {
        ShareLot lot{holder, firm_template.id, firm_template.shares_outstanding,
                     basis_per_share, Money()};
        RegimeParams params;
        params.capgains_rate = cfg.income_tax;
        Money cash;
        for (std::size_t k = 1; k <= horizon; ++k)
            cash -= realize_lot_gains(lot, price_path[k], params, Decimal((long long)k), scratch);
        wealth_stay = lot.quantity * price_path[horizon] + cash;
    }

    // Branch B: convert now, hold under the equity tax, reconvert at the end.
    Money wealth_convert;
    {
        Firm firm = firm_template;
        firm.regime = Regime::IncomeTaxed;
        std::vector<ShareLot> lots{
            {holder, firm.id, firm.shares_outstanding, basis_per_share, Money()}};
        Decimal dilution(1);
        if (cfg.recapture) {
            // Outside demand pegged at the post-conversion price, sized to
            // absorb whatever the credit leaves on the table.
            const Money post(price_path[0].value * cfg.income_tax.complement());
            const Shares supply(Decimal::mul_div(firm.shares_outstanding.count,
                                                 cfg.income_tax.value,
                                                 cfg.income_tax.complement()));
            const std::vector<Bid> outside{{market, post, Money(supply.count * post.value) + Money(1)}};
            convert_to_equity(firm, lots, cfg.income_tax, price_path[0], outside,
                              Decimal(0), scratch);
            dilution = cfg.income_tax.complement();
        } else {
            firm.regime = Regime::EquityTaxed;
        }
        for (std::size_t k = 1; k <= horizon; ++k)
            equity_tax_step(firm, lots, cfg.equity_tax, Decimal(1), Decimal((long long)k), scratch);
        const Money exit_price(price_path[horizon].value * dilution);
        convert_to_income(firm, lots, cfg.income_tax, exit_price, Decimal((long long)horizon), scratch);
        // Puts are at the money: zero intrinsic value, and the fresh basis
        // equals the market, so the final realization is tax-free.
        for (const auto& lot : lots)
            if (lot.holder == holder) wealth_convert += lot.quantity * exit_price;
    }

    return wealth_convert - wealth_stay;
}

} // namespace equitax
