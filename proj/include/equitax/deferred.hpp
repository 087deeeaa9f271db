#pragma once

#include "equitax/regimes.hpp"

namespace equitax {

/// Interest on the deferred tax embedded in untaxed corporate value: with
/// income tax t and interest rate i, a share fraction of t*i per year keeps
/// the deferral from being an interest-free loan. Collecting the interest,
/// not the missing tax itself, is what makes the whole firm value taxable
/// without asking which part of it is untaxed income.
struct DeferredParams {
    Rate income_tax_rate;  // t
    Rate interest_rate;    // i

    Rate levy() const { return Rate(income_tax_rate.value * interest_rate.value); }
};

inline Rate levy_fraction(const Rate& t, const Rate& i) {
    if (t.value < Decimal(0) || t.value >= Decimal(1))
        throw DomainError("income tax rate out of [0,1)");
    if (i.value < Decimal(0)) throw DomainError("interest rate must be non-negative");
    return Rate(t.value * i.value);
}

/// A tradable debt position. The holder's regime, not the issuer's, decides
/// the tax treatment; only income-taxed holders are in scope for the
/// proceeds tax below.
struct BondPosition {
    Money face;
    Decimal issue_date;  // years on the simulation clock
    Rate coupon;
    Regime holder_regime = Regime::IncomeTaxed;
};

/// Tax on bond proceeds with interest compounded from the bond's issue:
/// proceeds * t * (1+i)^years. At zero holding time this is the plain
/// income tax, so the treatment is continuous with the income-taxed sector.
inline Money bond_proceeds_tax(const BondPosition& bond, const Money& proceeds,
                               const Decimal& years_since_issue, const DeferredParams& params) {
    if (years_since_issue < Decimal(0)) throw DomainError("negative holding period");
    if (bond.holder_regime != Regime::IncomeTaxed) return Money();
    const Decimal growth = Decimal::pow(Decimal(1) + params.interest_rate.value, years_since_issue);
    return Money((proceeds.value * params.income_tax_rate.value) * growth);
}

/// Periodic share-interest levy on lots held outside the equity-taxed
/// sector: the same geometric accrual as the equity tax, at rate t*i,
/// logged as deferred-tax interest.
inline Shares share_interest_levy_step(
    Firm& firm, std::span<ShareLot> lots, const DeferredParams& params, const Decimal& dt_years,
    const Decimal& timestamp, TaxEventLog& log,
    const std::function<bool(const ShareLot&)>& in_scope) {
    if (dt_years < Decimal(0)) throw DomainError("levy step over negative time");
    const Rate levy = params.levy();
    if (dt_years.is_zero() || levy.value.is_zero()) return Shares(0);

    const Decimal keep = Decimal::pow(levy.complement(), dt_years);
    Shares accrued;
    for (ShareLot& lot : lots) {
        if (lot.firm != firm.id || lot.quantity.is_zero()) continue;
        if (in_scope && !in_scope(lot)) continue;
        const Shares kept(lot.quantity.count * keep);
        accrued += lot.quantity - kept;
        lot.quantity = kept;
    }
    firm.irs_accrued += accrued;
    if (!accrued.is_zero())
        log.append({timestamp, TaxEventKind::DeferredInterest, Money(), accrued, firm.id, kTaxAuthority});
    return accrued;
}

} // namespace equitax
