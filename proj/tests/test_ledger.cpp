#include "equitax/ledger.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

using namespace equitax;

namespace {

Firm make_firm(int shares, const char* price) {
    Firm f;
    f.id = 1;
    f.shares_outstanding = Shares(shares);
    f.price_per_share = Money::parse(price);
    return f;
}

} // namespace

TEST_CASE("issuing 20% of the new total prints a quarter of the old count") {
    Firm f = make_firm(2000, "100");
    const Shares fresh = issue_shares(f, Rate::parse("0.2"));
    CHECK(fresh == Shares(500));
    CHECK(f.shares_outstanding == Shares(2500));
    CHECK(f.price_per_share == Money::parse("80"));
    // value conserved exactly for these inputs
    CHECK(f.market_value() == Money::parse("200000"));
}

TEST_CASE("zero issue fraction is the identity") {
    Firm f = make_firm(777, "13.5");
    CHECK(issue_shares(f, Rate()) == Shares(0));
    CHECK(f.shares_outstanding == Shares(777));
    CHECK(f.price_per_share == Money::parse("13.5"));
}

TEST_CASE("issuing a third dilutes price to two thirds") {
    Firm f = make_firm(1000, "50");
    const Rate third(Decimal(1) / Decimal(3));  // rounded to 12 digits
    const Shares fresh = issue_shares(f, third);
    CHECK((fresh.count - Decimal(500)).abs() < Decimal::parse("0.000000001"));
    // conservation holds to the precision the rounded fraction allows
    const Decimal total = f.shares_outstanding.count * f.price_per_share.value;
    CHECK((total - Decimal(50000)).abs() < Decimal::parse("0.0000001"));
}

TEST_CASE("issue fraction out of range is rejected") {
    Firm f = make_firm(100, "10");
    CHECK_THROWS_AS(issue_shares(f, Rate(Decimal(1))), DomainError);
    CHECK_THROWS_AS(issue_shares(f, Rate::parse("1.5")), DomainError);
    CHECK_THROWS_AS(issue_shares(f, Rate(Decimal(-1))), DomainError);
}

TEST_CASE("value conservation is exact when the issue arithmetic is exact") {
    // fractions whose f/(1-f) keeps the new share count at 12 digits
    const struct { const char* fraction; int shares; const char* price; } cases[] = {
        {"0.2", 2000, "100"}, {"0.25", 1200, "60"}, {"0.5", 640, "12.5"}, {"0.1", 900, "33"},
    };
    for (const auto& c : cases) {
        Firm f = make_firm(c.shares, c.price);
        const Money before = f.market_value();
        issue_shares(f, Rate::parse(c.fraction));
        CHECK(f.market_value() == before);
    }
}

TEST_CASE("transferring shares keeps basis and conserves quantity") {
    ShareLot lot{1, 1, Shares(2000), Money::parse("75"), Money::parse("20")};
    ShareLot moved = transfer_shares(lot, 2, Shares(500));
    CHECK(lot.quantity == Shares(1500));
    CHECK(moved.quantity == Shares(500));
    CHECK(moved.holder == 2);
    CHECK(moved.purchase_price_per_share == Money::parse("75"));
    CHECK(moved.reinvested_after_acquisition_per_share == Money::parse("20"));
    CHECK(lot.quantity + moved.quantity == Shares(2000));

    SECTION("full transfer empties the source") {
        ShareLot rest = transfer_shares(lot, 3, lot.quantity);
        CHECK(lot.quantity.is_zero());
        CHECK(rest.quantity == Shares(1500));
    }
    SECTION("zero transfer is a no-op") {
        ShareLot none = transfer_shares(lot, 3, Shares(0));
        CHECK(none.quantity.is_zero());
        CHECK(lot.quantity == Shares(1500));
    }
    SECTION("overselling is rejected") {
        CHECK_THROWS_AS(transfer_shares(lot, 3, Shares(1501)), DomainError);
        CHECK_THROWS_AS(transfer_shares(lot, 3, Shares(-1)), DomainError);
    }
}

TEST_CASE("share conservation checker") {
    Firm f = make_firm(1000, "10");
    f.irs_accrued = Shares(40);
    std::vector<ShareLot> lots{{1, 1, Shares(760), Money::parse("10"), Money()},
                               {2, 1, Shares(200), Money::parse("10"), Money()}};
    CHECK_NOTHROW(check_share_conservation(f, lots));
    lots[0].quantity -= Shares::parse("0.000000000001");
    CHECK_THROWS_AS(check_share_conservation(f, lots), InvariantError);
}

TEST_CASE("income split must sum to one exactly") {
    IncomeSplit ok{Rate::parse("0.5"), Rate::parse("0.2"), Rate::parse("0.2"), Rate::parse("0.1")};
    CHECK_NOTHROW(ok.validate());
    IncomeSplit off{Rate::parse("0.5"), Rate::parse("0.2"), Rate::parse("0.2"),
                    Rate::parse("0.100000000001")};
    CHECK_THROWS_AS(off.validate(), DomainError);
}

TEST_CASE("tax event log serializes to JSONL and folds back exactly") {
    TaxEventLog log;
    log.append({Decimal::parse("0.25"), TaxEventKind::EquityAccrual, Money(),
                Shares::parse("12.345678901234"), 3, kTaxAuthority});
    log.append({Decimal(1), TaxEventKind::IncomeTax, Money::parse("8"), Shares(), 2, 0});
    log.append({Decimal(1), TaxEventKind::AuctionProceeds, Money::parse("2000"), Shares(), 3, 0});
    log.append({Decimal(2), TaxEventKind::CapGainsTax, Money::parse("-3.5"), Shares(), 2, 7});

    const std::string text = log.to_jsonl();
    CHECK(std::count(text.begin(), text.end(), '\n') == 4);

    std::istringstream in(text);
    const TaxEventLog replayed = TaxEventLog::read_jsonl(in);
    REQUIRE(replayed.size() == log.size());
    for (std::size_t i = 0; i < log.size(); ++i) CHECK(replayed.events()[i] == log.events()[i]);

    // replay determinism: every revenue total is a fold over events
    CHECK(replayed.total_cash() == log.total_cash());
    CHECK(replayed.total_cash() == Money::parse("2004.5"));
    CHECK(replayed.cash_total(TaxEventKind::AuctionProceeds) == Money::parse("2000"));
    CHECK(replayed.share_total(TaxEventKind::EquityAccrual) == Shares::parse("12.345678901234"));
}

TEST_CASE("random transfer splits conserve shares exactly") {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<long long> qty(1, 1'000'000'000'000LL);
    for (int k = 0; k < 500; ++k) {
        const auto total = Decimal::from_mantissa(BigInt(qty(rng)) * 1000);
        ShareLot lot{1, 1, Shares(total), Money::parse("3.21"), Money::parse("0.07")};
        const auto part = Decimal::from_mantissa(lot.quantity.count.mantissa() / (1 + k % 7));
        ShareLot out = transfer_shares(lot, 2, Shares(part));
        CHECK(lot.quantity.count + out.quantity.count == total);
        CHECK(out.cost_basis_per_share() == lot.cost_basis_per_share());
    }
}
