#pragma once

#include "equitax/types.hpp"

#include <json.hpp>

#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace equitax {

enum class Regime { IncomeTaxed, EquityTaxed };

inline const char* to_string(Regime r) {
    return r == Regime::IncomeTaxed ? "income" : "equity";
}

/// Four-way split of corporate income. Expenses keep the business running,
/// dividends are divested, reinvestment accumulates in the stock, and the
/// masked part is reinvestment disguised as deductible expenses.
struct IncomeSplit {
    Rate expenses;
    Rate dividends;
    Rate reinvestment;
    Rate masked;

    void validate() const {
        const Decimal sum = expenses.value + dividends.value + reinvestment.value + masked.value;
        if (sum != Decimal(1))
            throw DomainError("income split fractions must sum to 1, got " + sum.str());
        for (const Rate* r : {&expenses, &dividends, &reinvestment, &masked})
            if (r->value < Decimal(0) || r->value > Decimal(1))
                throw DomainError("income split fraction out of [0,1]: " + r->value.str());
    }
};

/// Geometric pre-tax return process parameters, per year.
struct ReturnProcess {
    double drift = 0.0;
    double volatility = 0.0;
};

struct Firm {
    FirmId id = 0;
    Regime regime = Regime::IncomeTaxed;
    Shares shares_outstanding;
    Shares irs_accrued;  // accrued to the tax authority, awaiting auction
    Money price_per_share;
    ReturnProcess pretax_return;
    IncomeSplit income_split;
    Money cumulative_after_tax_reinvested_per_share;

    Money market_value() const { return shares_outstanding * price_per_share; }
    Rate dividend_policy() const { return income_split.dividends; }
    Shares publicly_held() const { return shares_outstanding - irs_accrued; }
};

/// A holder's position in one firm. The two per-share fields define the
/// constant-dollar cost basis: purchase price plus after-tax corporate income
/// reinvested since the lot was acquired.
struct ShareLot {
    HolderId holder = 0;
    FirmId firm = 0;
    Shares quantity;
    Money purchase_price_per_share;
    Money reinvested_after_acquisition_per_share;

    Money cost_basis_per_share() const {
        return purchase_price_per_share + reinvested_after_acquisition_per_share;
    }
};

enum class TaxEventKind {
    EquityAccrual,
    AuctionProceeds,
    IncomeTax,
    CapGainsTax,
    DividendTax,
    ConversionTax,
    PropertyTax,
    DeferredInterest,
};

inline const char* to_string(TaxEventKind k) {
    switch (k) {
        case TaxEventKind::EquityAccrual: return "equity_accrual";
        case TaxEventKind::AuctionProceeds: return "auction_proceeds";
        case TaxEventKind::IncomeTax: return "income_tax";
        case TaxEventKind::CapGainsTax: return "capgains_tax";
        case TaxEventKind::DividendTax: return "dividend_tax";
        case TaxEventKind::ConversionTax: return "conversion_tax";
        case TaxEventKind::PropertyTax: return "property_tax";
        case TaxEventKind::DeferredInterest: return "deferred_interest";
    }
    throw InvariantError("unknown tax event kind");
}

inline TaxEventKind tax_event_kind_from(std::string_view s) {
    for (TaxEventKind k : {TaxEventKind::EquityAccrual, TaxEventKind::AuctionProceeds,
                           TaxEventKind::IncomeTax, TaxEventKind::CapGainsTax,
                           TaxEventKind::DividendTax, TaxEventKind::ConversionTax,
                           TaxEventKind::PropertyTax, TaxEventKind::DeferredInterest})
        if (s == to_string(k)) return k;
    throw DomainError("unknown tax event kind '" + std::string(s) + "'");
}

/// One revenue-relevant fact. Cash events carry `amount`; in-kind share
/// accruals carry `shares`. Every revenue figure in any report is a fold
/// over these records, never a separately maintained counter.
struct TaxEvent {
    Decimal timestamp;  // simulation clock, years
    TaxEventKind kind = TaxEventKind::IncomeTax;
    Money amount;
    Shares shares;
    FirmId firm = 0;
    HolderId holder = 0;

    friend bool operator==(const TaxEvent&, const TaxEvent&) = default;
};

/// Append-only event log with line-delimited JSON serialization.
class TaxEventLog {
public:
    void append(TaxEvent e) { events_.push_back(std::move(e)); }

    const std::vector<TaxEvent>& events() const { return events_; }
    std::size_t size() const { return events_.size(); }
    bool empty() const { return events_.empty(); }

    Money total_cash() const {
        Money sum;
        for (const auto& e : events_)
            if (e.shares.is_zero()) sum += e.amount;
        return sum;
    }

    Money cash_total(TaxEventKind kind) const {
        Money sum;
        for (const auto& e : events_)
            if (e.kind == kind) sum += e.amount;
        return sum;
    }

    Shares share_total(TaxEventKind kind) const {
        Shares sum;
        for (const auto& e : events_)
            if (e.kind == kind) sum += e.shares;
        return sum;
    }

    void write_jsonl(std::ostream& out) const {
        for (const auto& e : events_) {
            nlohmann::ordered_json j;
            j["t"] = e.timestamp.str();
            j["kind"] = to_string(e.kind);
            if (!e.shares.is_zero())
                j["shares"] = e.shares.str();
            else
                j["amount"] = e.amount.str();
            j["firm"] = e.firm;
            j["holder"] = e.holder;
            out << j.dump() << '\n';
        }
    }

    std::string to_jsonl() const {
        std::ostringstream os;
        write_jsonl(os);
        return os.str();
    }

    static TaxEventLog read_jsonl(std::istream& in) {
        TaxEventLog log;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto j = nlohmann::json::parse(line);
            TaxEvent e;
            e.timestamp = Decimal::parse(j.at("t").get<std::string>());
            e.kind = tax_event_kind_from(j.at("kind").get<std::string>());
            if (j.contains("shares")) e.shares = Shares::parse(j.at("shares").get<std::string>());
            if (j.contains("amount")) e.amount = Money::parse(j.at("amount").get<std::string>());
            e.firm = j.at("firm").get<FirmId>();
            e.holder = j.at("holder").get<HolderId>();
            log.append(std::move(e));
        }
        return log;
    }

private:
    std::vector<TaxEvent> events_;
};

/// Issues new shares amounting to `fraction_of_new_total` of the enlarged
/// share count. The per-share price scales by (1 - fraction) so the firm's
/// total market value is unchanged; no tax is applied here. Returns the
/// newly printed share count, which the caller must place (typically into
/// a conversion auction) before the next conservation check.
inline Shares issue_shares(Firm& firm, const Rate& fraction_of_new_total) {
    const Decimal& f = fraction_of_new_total.value;
    if (f < Decimal(0) || f >= Decimal(1))
        throw DomainError("issue fraction must lie in [0,1), got " + f.str());
    if (f.is_zero()) return Shares(0);
    const Decimal keep = Decimal(1) - f;
    const Shares new_shares(Decimal::mul_div(firm.shares_outstanding.count, f, keep));
    firm.shares_outstanding += new_shares;
    firm.price_per_share = Money(firm.price_per_share.value * keep);
    return new_shares;
}

/// Splits `qty` shares out of `lot` to holder `to`. Cost-basis fields carry
/// over to the split lot; total quantity is conserved.
inline ShareLot transfer_shares(ShareLot& lot, HolderId to, const Shares& qty) {
    if (qty.count < Decimal(0)) throw DomainError("cannot transfer a negative share count");
    if (qty > lot.quantity)
        throw DomainError("oversell: transferring " + qty.str() + " from a lot of " + lot.quantity.str());
    lot.quantity -= qty;
    ShareLot out = lot;
    out.holder = to;
    out.quantity = qty;
    return out;
}

/// Sum of holder lots plus accrued-but-unauctioned shares must equal shares
/// outstanding, exactly. Call at step boundaries.
inline void check_share_conservation(const Firm& firm, std::span<const ShareLot> lots) {
    Shares held;
    for (const auto& lot : lots)
        if (lot.firm == firm.id) held += lot.quantity;
    if (held + firm.irs_accrued != firm.shares_outstanding)
        throw InvariantError("share conservation broken for firm " + std::to_string(firm.id) +
                             ": lots " + held.str() + " + accrued " + firm.irs_accrued.str() +
                             " != outstanding " + firm.shares_outstanding.str());
}

} // namespace equitax
