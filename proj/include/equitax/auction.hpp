#pragma once

#include "equitax/types.hpp"

#include <algorithm>
#include <optional>
#include <vector>

namespace equitax {

/// Sealed bid: the highest acceptable share price and the total dollar amount
/// to spend. A missing price limit means "any price" — reserved for cost-basis
/// credit bids, which must fill whatever the market decides.
struct Bid {
    HolderId bidder = 0;
    std::optional<Money> price_limit;  // nullopt = unbounded
    Money dollar_amount;

    bool unbounded() const { return !price_limit.has_value(); }
};

struct Allocation {
    HolderId bidder = 0;
    Shares shares;
    Money dollars_paid;
    std::size_t bid_index = 0;  // position in the submitted bid list
};

struct AuctionResult {
    Money clearing_price;
    std::vector<Allocation> allocations;  // one entry per filled bid
    Shares unsold;
    Money proceeds;  // sum of dollars_paid, credit and cash alike

    Shares shares_to(HolderId bidder) const {
        Shares total;
        for (const auto& a : allocations)
            if (a.bidder == bidder) total += a.shares;
        return total;
    }

    Money paid_by(HolderId bidder) const {
        Money total;
        for (const auto& a : allocations)
            if (a.bidder == bidder) total += a.dollars_paid;
        return total;
    }
};

namespace detail {

// demand(p) >= supply, compared exactly: sum(amount)/p >= S  <=>
// sum(amount_mantissa)*10^12 >= S_mantissa*p_mantissa.
inline bool demand_covers(const BigInt& amount_mantissa_sum, const Money& price, const Shares& supply) {
    return amount_mantissa_sum * Decimal::unit() >= supply.count.mantissa() * price.value.mantissa();
}

struct IndexedBid {
    std::size_t index;
    const Bid* bid;
};

// Pro-rata split of `pool` shares by dollar amount, summing to `pool`
// exactly: rounding residue lands on the largest bid (ties: lowest bidder
// id), keeping the outcome independent of input order.
inline void allocate_pro_rata(const Shares& pool, const std::vector<IndexedBid>& group,
                              std::vector<Shares>& out) {
    Money total;
    for (const auto& g : group) total += g.bid->dollar_amount;
    Shares assigned;
    std::size_t residual_slot = 0;
    for (std::size_t i = 0; i < group.size(); ++i) {
        out[group[i].index] = Shares(
            Decimal::mul_div(pool.count, group[i].bid->dollar_amount.value, total.value));
        assigned += out[group[i].index];
        const auto& best = *group[residual_slot].bid;
        const auto& cur = *group[i].bid;
        if (cur.dollar_amount > best.dollar_amount ||
            (cur.dollar_amount == best.dollar_amount && cur.bidder < best.bidder))
            residual_slot = i;
    }
    out[group[residual_slot].index] += pool - assigned;
}

} // namespace detail

/// Uniform-price sealed-bid auction. Demand at price p is the total dollar
/// amount of bids with limit >= p, divided by p — a decreasing step function.
/// The clearing price is the highest submitted finite limit at which demand
/// still covers supply. Bids above the clearing price (and all unbounded
/// bids) fill in full; bids exactly at it are rationed pro-rata by dollar
/// amount. If no price clears, the lowest finite limit sells what it can and
/// the rest is reported unsold. A bid set with no finite limit at all falls
/// back to `reserve_price`.
///
/// Shares allocated + unsold always equals supply, exactly.
inline AuctionResult clear_auction(const Shares& supply, const std::vector<Bid>& bids,
                                   const Money& reserve_price = Money(Decimal(1))) {
    if (supply.count <= Decimal(0))
        throw DomainError("auction supply must be positive, got " + supply.str());
    if (reserve_price.value <= Decimal(0))
        throw DomainError("reserve price must be positive");

    AuctionResult result;
    if (bids.empty()) {
        result.unsold = supply;
        return result;
    }

    std::vector<Money> candidates;
    for (const auto& b : bids) {
        if (b.dollar_amount.value <= Decimal(0))
            throw DomainError("bid dollar amount must be positive");
        if (!b.unbounded()) {
            if (b.price_limit->value <= Decimal(0))
                throw DomainError("bid price limit must be positive");
            candidates.push_back(*b.price_limit);
        }
    }
    std::sort(candidates.begin(), candidates.end(),
              [](const Money& a, const Money& b) { return b < a; });
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    // Highest candidate price still covered by demand.
    std::optional<Money> clearing;
    bool subscribed = false;
    for (const auto& p : candidates) {
        BigInt amount_sum = 0;
        for (const auto& b : bids)
            if (b.unbounded() || *b.price_limit >= p)
                amount_sum += b.dollar_amount.value.mantissa();
        if (detail::demand_covers(amount_sum, p, supply)) {
            clearing = p;
            subscribed = true;
            break;
        }
    }
    if (!clearing && !candidates.empty()) clearing = candidates.back();  // undersubscribed
    if (!clearing) {
        // Only unbounded bids were submitted; fall back to the reserve price.
        clearing = reserve_price;
        BigInt amount_sum = 0;
        for (const auto& b : bids) amount_sum += b.dollar_amount.value.mantissa();
        subscribed = detail::demand_covers(amount_sum, *clearing, supply);
    }
    const Money p = *clearing;

    std::vector<detail::IndexedBid> above, at;
    for (std::size_t i = 0; i < bids.size(); ++i) {
        const Bid& b = bids[i];
        if (b.unbounded() || *b.price_limit > p)
            above.push_back({i, &b});
        else if (*b.price_limit == p)
            at.push_back({i, &b});
    }

    std::vector<Shares> fills(bids.size());
    BigInt above_amount = 0;
    for (const auto& g : above) above_amount += g.bid->dollar_amount.value.mantissa();

    if (detail::demand_covers(above_amount, p, supply)) {
        // Bids strictly above the clearing price cover supply on their own;
        // they are rationed and bids at exactly p get nothing.
        detail::allocate_pro_rata(supply, above, fills);
    } else {
        Shares remaining = supply;
        for (const auto& g : above) {
            fills[g.index] = shares_bought(g.bid->dollar_amount, p);
            remaining -= fills[g.index];
        }
        Shares at_full;
        for (const auto& g : at) at_full += shares_bought(g.bid->dollar_amount, p);
        if (subscribed && !at.empty() && at_full >= remaining) {
            detail::allocate_pro_rata(remaining, at, fills);
        } else {
            for (const auto& g : at) {
                fills[g.index] = shares_bought(g.bid->dollar_amount, p);
                remaining -= fills[g.index];
            }
            if (remaining.count < Decimal(0)) {
                // Rounding dust pushed full fills past supply in a nominally
                // undersubscribed auction; ration everyone to stay conserving.
                std::vector<detail::IndexedBid> everyone = above;
                everyone.insert(everyone.end(), at.begin(), at.end());
                std::fill(fills.begin(), fills.end(), Shares());
                detail::allocate_pro_rata(supply, everyone, fills);
                remaining = Shares();
            }
            result.unsold = remaining;
        }
    }

    result.clearing_price = p;
    Shares allocated;
    for (std::size_t i = 0; i < bids.size(); ++i) {
        if (fills[i].is_zero()) continue;
        Allocation a;
        a.bidder = bids[i].bidder;
        a.shares = fills[i];
        a.dollars_paid = fills[i] * p;
        a.bid_index = i;
        allocated += a.shares;
        result.proceeds += a.dollars_paid;
        result.allocations.push_back(std::move(a));
    }
    if (allocated + result.unsold != supply)
        throw InvariantError("auction conservation broken: allocated " + allocated.str() +
                             " + unsold " + result.unsold.str() + " != supply " + supply.str());
    return result;
}

struct VickreyBid {
    HolderId bidder = 0;
    Money price;
};

struct VickreyOutcome {
    HolderId winner = 0;
    Money payment;  // second-highest price; own price when alone
};

/// Second-price auction for a single indivisible item. The highest bidder
/// wins and pays the runner-up's price, so the payment never depends on the
/// winner's own bid. Price ties break toward the lower bidder id.
inline std::optional<VickreyOutcome> vickrey_option_auction(std::vector<VickreyBid> bids) {
    if (bids.empty()) return std::nullopt;
    std::sort(bids.begin(), bids.end(), [](const VickreyBid& a, const VickreyBid& b) {
        if (a.price != b.price) return b.price < a.price;
        return a.bidder < b.bidder;
    });
    VickreyOutcome out;
    out.winner = bids.front().bidder;
    out.payment = bids.size() > 1 ? bids[1].price : bids[0].price;
    return out;
}

} // namespace equitax
