#pragma once

#include "equitax/ledger.hpp"

#include <functional>
#include <span>

namespace equitax {

/// How often a holder realizes capital gains. Realization frequency decides
/// how often the nominal rate compounds, which drives the effective rate.
struct RealizationPolicy {
    enum class Mode { Annual, EveryNYears, DeferToHorizon };

    Mode mode = Mode::Annual;
    int n = 1;

    static RealizationPolicy annual() { return {Mode::Annual, 1}; }
    static RealizationPolicy every(int n) {
        if (n < 1) throw DomainError("realization period must be >= 1 year");
        return {Mode::EveryNYears, n};
    }
    static RealizationPolicy defer() { return {Mode::DeferToHorizon, 0}; }
};

struct RegimeParams {
    Rate income_tax_rate;   // t, corporate
    Rate equity_tax_rate;   // tau, share fraction per year
    Rate capgains_rate;
    Rate dividend_rate;

    void validate() const {
        for (const Rate* r : {&income_tax_rate, &equity_tax_rate, &capgains_rate, &dividend_rate})
            if (r->value < Decimal(0) || r->value >= Decimal(1))
                throw DomainError("tax rate out of [0,1): " + r->value.str());
    }

    static RegimeParams zero() { return {}; }
};

/// Growth multiple of a portfolio gaining `g` per year for `years` years,
/// taxed at `tax` on gains at each realization. Annual realization compounds
/// the after-tax rate; deferral compounds the pre-tax rate and taxes the
/// accumulated gain once.
inline Decimal effective_growth(const Rate& g, const Rate& tax, long long years,
                                const RealizationPolicy& policy) {
    if (g.value < Decimal(0)) throw DomainError("growth rate must be non-negative");
    if (years < 0) throw DomainError("years must be non-negative");
    if (years == 0) return Decimal(1);

    const Decimal keep = tax.complement();
    const auto deferred_block = [&](long long block_years) {
        const Decimal gross = (Decimal(1) + g.value).pow_int(block_years);
        return Decimal(1) + (gross - Decimal(1)) * keep;
    };

    switch (policy.mode) {
        case RealizationPolicy::Mode::Annual:
            return (Decimal(1) + g.value * keep).pow_int(years);
        case RealizationPolicy::Mode::DeferToHorizon:
            return deferred_block(years);
        case RealizationPolicy::Mode::EveryNYears: {
            const long long blocks = years / policy.n;
            const long long remainder = years % policy.n;
            Decimal result = deferred_block(policy.n).pow_int(blocks);
            if (remainder > 0) result *= deferred_block(remainder);
            return result;
        }
    }
    throw InvariantError("unreachable realization mode");
}

/// Per-dollar decomposition of one period of corporate income under the
/// income tax. The corporation is taxed on dividends and reinvestment;
/// expenses and the masked part escape. Negative income is a plain loss:
/// no tax, no dividend, the whole amount flows to value.
struct IncomeStepResult {
    Money corporate_tax;
    Money dividends_declared;     // gross, pre corporate tax
    Money dividends_paid;         // declared net of corporate tax
    Money after_tax_reinvested;   // counts toward cost basis
    Money masked_reinvested;      // hidden, never enters the basis
    Money loss;                   // negative when the period lost money, else zero
};

inline IncomeStepResult split_income(const Money& pretax_income, const IncomeSplit& split,
                                     const Rate& corporate_rate) {
    IncomeStepResult r;
    if (pretax_income.value <= Decimal(0)) {
        r.loss = pretax_income;  // no tax, no dividend; value takes the hit
        return r;
    }
    const Money dividends = pretax_income * split.dividends;
    const Money reinvested = pretax_income * split.reinvestment;
    r.corporate_tax = Money((dividends + reinvested).value * corporate_rate.value);
    r.dividends_declared = dividends;
    r.dividends_paid = dividends * corporate_rate.complement();
    r.after_tax_reinvested = reinvested * corporate_rate.complement();
    r.masked_reinvested = pretax_income * split.masked;
    return r;
}

/// Applies one period of the income tax to a firm's pre-tax income.
/// Returns the flow decomposition and logs the corporate tax. Shareholder
/// dividend tax and per-lot capital gains are separate steps — they depend
/// on who holds the shares and on each lot's realization schedule.
inline IncomeStepResult income_tax_step(Firm& firm, const Money& pretax_income,
                                        const RegimeParams& params, const Decimal& timestamp,
                                        TaxEventLog& log) {
    if (firm.regime != Regime::IncomeTaxed)
        throw DomainError("income_tax_step on a firm that is not income-taxed");
    firm.income_split.validate();
    const IncomeStepResult r = split_income(pretax_income, firm.income_split, params.income_tax_rate);
    if (!r.corporate_tax.value.is_zero())
        log.append({timestamp, TaxEventKind::IncomeTax, r.corporate_tax, Shares(), firm.id, kTaxAuthority});
    if (firm.shares_outstanding.count > Decimal(0))
        firm.cumulative_after_tax_reinvested_per_share +=
            Money(r.after_tax_reinvested.value / firm.shares_outstanding.count);
    return r;
}

/// Shareholder-level dividend tax on a cash dividend receipt.
inline Money dividend_tax(const Money& dividends_received, const RegimeParams& params,
                          const Decimal& timestamp, FirmId firm, HolderId holder, TaxEventLog& log) {
    const Money tax = dividends_received * params.dividend_rate;
    if (!tax.value.is_zero())
        log.append({timestamp, TaxEventKind::DividendTax, tax, Shares(), firm, holder});
    return tax;
}

/// Realizes a lot's accumulated gain at `market_price` and resets its basis.
/// Losses produce a negative tax (full offset), which keeps the after-tax
/// return proportional to the pre-tax return under annual realization.
inline Money realize_lot_gains(ShareLot& lot, const Money& market_price, const RegimeParams& params,
                               const Decimal& timestamp, TaxEventLog& log) {
    const Money gain_per_share = market_price - lot.cost_basis_per_share();
    const Money tax = Money((lot.quantity.count * gain_per_share.value) * params.capgains_rate.value);
    lot.purchase_price_per_share = market_price;
    lot.reinvested_after_acquisition_per_share = Money();
    if (!tax.value.is_zero())
        log.append({timestamp, TaxEventKind::CapGainsTax, tax, Shares(), lot.firm, lot.holder});
    return tax;
}

/// One period of the equity tax: each publicly held lot of the firm sheds a
/// fraction 1-(1-tau)^dt of its shares into the authority's accrual bucket.
/// The geometric form makes steps compose exactly: dt then dt' accrues the
/// same total as dt+dt'. No money moves until the accrued shares are
/// auctioned. Lots the `exempt` predicate selects (cross-owned shares of
/// other equity-taxed firms) are waived.
inline Shares equity_tax_step(
    Firm& firm, std::span<ShareLot> lots, const Rate& tau, const Decimal& dt_years,
    const Decimal& timestamp, TaxEventLog& log,
    const std::function<bool(const ShareLot&)>& exempt = {}) {
    if (firm.regime != Regime::EquityTaxed)
        throw DomainError("equity_tax_step on a firm that is not equity-taxed");
    if (dt_years < Decimal(0)) throw DomainError("equity tax step over negative time");
    if (dt_years.is_zero() || tau.value.is_zero()) return Shares(0);

    const Decimal keep = Decimal::pow(tau.complement(), dt_years);
    Shares accrued;
    for (ShareLot& lot : lots) {
        if (lot.firm != firm.id || lot.quantity.is_zero()) continue;
        if (exempt && exempt(lot)) continue;
        const Shares kept(lot.quantity.count * keep);
        accrued += lot.quantity - kept;
        lot.quantity = kept;
    }
    firm.irs_accrued += accrued;
    if (!accrued.is_zero())
        log.append({timestamp, TaxEventKind::EquityAccrual, Money(), accrued, firm.id, kTaxAuthority});
    return accrued;
}

/// Taxing the price of an asset and taxing its income are the same levy at
/// different rates: whole iceberg at r, or just the tip at r divided by the
/// yield. Both paths are computed with a single final rounding so the two
/// Money results are bit-identical whenever the inputs are exactly
/// representable.
struct IcebergEquivalence {
    Money tax_on_price;
    Rate equivalent_income_tax_rate;
    Money tax_via_income_path;
};

inline IcebergEquivalence iceberg_equivalence(const Money& value, const Rate& income_yield,
                                              const Rate& price_tax) {
    if (income_yield.value <= Decimal(0))
        throw DomainError("iceberg equivalence needs a positive income yield");
    IcebergEquivalence out;
    out.tax_on_price = value * price_tax;
    out.equivalent_income_tax_rate = Rate(price_tax.value / income_yield.value);
    const Money income = value * income_yield;
    out.tax_via_income_path = Money(Decimal::mul_div(income.value, price_tax.value, income_yield.value));
    return out;
}

} // namespace equitax
