#include "equitax/regimes.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace equitax;

TEST_CASE("10% gains taxed 30% annually grow at exactly 7%") {
    const Decimal one_year =
        effective_growth(Rate::parse("0.1"), Rate::parse("0.3"), 1, RealizationPolicy::annual());
    CHECK(one_year == Decimal::parse("1.07"));
    const Decimal five =
        effective_growth(Rate::parse("0.1"), Rate::parse("0.3"), 5, RealizationPolicy::annual());
    CHECK(five == Decimal::parse("1.07").pow_int(5));
}

TEST_CASE("zero horizon always multiplies by one") {
    for (const auto& mode : {RealizationPolicy::annual(), RealizationPolicy::defer(),
                             RealizationPolicy::every(7)})
        CHECK(effective_growth(Rate::parse("0.37"), Rate::parse("0.99"), 0, mode) == Decimal(1));
}

TEST_CASE("95 years of deferral vs annual realization: roughly a factor of ten") {
    const Rate g = Rate::parse("0.1");
    const Rate t = Rate::parse("0.3");
    const Decimal annual = effective_growth(g, t, 95, RealizationPolicy::annual());
    const Decimal deferred = effective_growth(g, t, 95, RealizationPolicy::defer());
    const double ratio = (deferred / annual).to_double();
    CHECK(ratio > 9.0);
    CHECK(ratio < 10.5);

    // independent evaluation of both closed forms in long double
    const long double annual_ld = powl(1.07L, 95);
    const long double deferred_ld = 1.0L + 0.7L * (powl(1.1L, 95) - 1.0L);
    CHECK(std::fabs(ratio - static_cast<double>(deferred_ld / annual_ld)) < 1e-9);
}

TEST_CASE("realizing less often always grows more") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> years_d(3, 60), g_d(1, 20), t_d(5, 95);
    for (int k = 0; k < 300; ++k) {
        const int years = years_d(rng);
        const Rate g(Decimal(g_d(rng)) / Decimal(100));
        const Rate t(Decimal(t_d(rng)) / Decimal(100));
        std::uniform_int_distribution<int> n_d(2, years - 1);
        const int n = n_d(rng);
        const Decimal annual = effective_growth(g, t, years, RealizationPolicy::annual());
        const Decimal block = effective_growth(g, t, years, RealizationPolicy::every(n));
        const Decimal deferred = effective_growth(g, t, years, RealizationPolicy::defer());
        CHECK(annual < block);
        CHECK(block < deferred);
    }
}

TEST_CASE("block realization degenerates to the two extremes") {
    const Rate g = Rate::parse("0.08");
    const Rate t = Rate::parse("0.25");
    CHECK(effective_growth(g, t, 12, RealizationPolicy::every(1)) ==
          effective_growth(g, t, 12, RealizationPolicy::annual()));
    CHECK(effective_growth(g, t, 12, RealizationPolicy::every(12)) ==
          effective_growth(g, t, 12, RealizationPolicy::defer()));
    CHECK(effective_growth(g, t, 12, RealizationPolicy::every(30)) ==
          effective_growth(g, t, 12, RealizationPolicy::defer()));
    CHECK_THROWS_AS(RealizationPolicy::every(0), DomainError);
}

TEST_CASE("corporate tax falls on dividends and reinvestment only") {
    Firm firm;
    firm.id = 1;
    firm.regime = Regime::IncomeTaxed;
    firm.shares_outstanding = Shares(100);
    firm.income_split = {Rate::parse("0.5"), Rate::parse("0.2"), Rate::parse("0.2"),
                         Rate::parse("0.1")};
    RegimeParams params;
    params.income_tax_rate = Rate::parse("0.2");
    TaxEventLog log;
    const IncomeStepResult r = income_tax_step(firm, Money(100), params, Decimal(1), log);
    CHECK(r.corporate_tax == Money(8));  // 20% of the $40 in dividends+reinvestment
    CHECK(r.dividends_paid == Money(16));
    CHECK(r.after_tax_reinvested == Money(16));
    CHECK(r.masked_reinvested == Money(10));
    CHECK(log.cash_total(TaxEventKind::IncomeTax) == Money(8));
    CHECK(firm.cumulative_after_tax_reinvested_per_share == Money::parse("0.16"));
}

TEST_CASE("all-expenses firms owe nothing") {
    IncomeSplit s{Rate(Decimal(1)), Rate(), Rate(), Rate()};
    const auto r = split_income(Money(500), s, Rate::parse("0.35"));
    CHECK(r.corporate_tax.value.is_zero());
    CHECK(r.dividends_paid.value.is_zero());
}

TEST_CASE("masking more income strictly lowers the tax") {
    RegimeParams params;
    params.income_tax_rate = Rate::parse("0.2");
    const IncomeSplit open{Rate::parse("0.5"), Rate::parse("0.2"), Rate::parse("0.2"),
                           Rate::parse("0.1")};
    const IncomeSplit hidden{Rate::parse("0.5"), Rate::parse("0.2"), Rate::parse("0.1"),
                             Rate::parse("0.2")};
    const auto a = split_income(Money(100), open, params.income_tax_rate);
    const auto b = split_income(Money(100), hidden, params.income_tax_rate);
    CHECK(b.corporate_tax < a.corporate_tax);
}

TEST_CASE("losses pass through untaxed") {
    const IncomeSplit s{Rate::parse("0.5"), Rate::parse("0.2"), Rate::parse("0.2"),
                        Rate::parse("0.1")};
    const auto r = split_income(Money(-40), s, Rate::parse("0.2"));
    CHECK(r.corporate_tax.value.is_zero());
    CHECK(r.loss == Money(-40));
    CHECK(r.dividends_paid.value.is_zero());
}

namespace {

Firm equity_firm(int shares) {
    Firm f;
    f.id = 1;
    f.regime = Regime::EquityTaxed;
    f.shares_outstanding = Shares(shares);
    f.price_per_share = Money(100);
    return f;
}

} // namespace

TEST_CASE("a whole year at 2% accrues exactly 2% of publicly held shares") {
    Firm firm = equity_firm(1000);
    std::vector<ShareLot> lots{{1, 1, Shares(1000), Money(100), Money()}};
    TaxEventLog log;
    const Shares accrued =
        equity_tax_step(firm, lots, Rate::parse("0.02"), Decimal(1), Decimal(1), log);
    CHECK(accrued == Shares(20));
    CHECK(firm.irs_accrued == Shares(20));
    CHECK(lots[0].quantity == Shares(980));
    check_share_conservation(firm, lots);
    CHECK(log.share_total(TaxEventKind::EquityAccrual) == Shares(20));
}

TEST_CASE("zero dt accrues nothing; negative dt is rejected") {
    Firm firm = equity_firm(1000);
    std::vector<ShareLot> lots{{1, 1, Shares(1000), Money(100), Money()}};
    TaxEventLog log;
    CHECK(equity_tax_step(firm, lots, Rate::parse("0.02"), Decimal(0), Decimal(0), log).is_zero());
    CHECK_THROWS_AS(equity_tax_step(firm, lots, Rate::parse("0.02"), Decimal(-1), Decimal(0), log),
                    DomainError);
    CHECK_THROWS_AS([&] {
        Firm wrong = firm;
        wrong.regime = Regime::IncomeTaxed;
        equity_tax_step(wrong, lots, Rate::parse("0.02"), Decimal(1), Decimal(0), log);
    }(), DomainError);
}

TEST_CASE("half-year accrual follows the geometric rate") {
    Firm firm = equity_firm(1000);
    std::vector<ShareLot> lots{{1, 1, Shares(1000), Money(100), Money()}};
    TaxEventLog log;
    const Shares accrued = equity_tax_step(firm, lots, Rate::parse("0.02"),
                                           Decimal::parse("0.5"), Decimal(1), log);
    // 1 - 0.98^0.5 = 1.0050506339...%, via long double sqrt as the oracle
    const double expected = (1.0 - std::sqrt(0.98)) * 1000.0;
    CHECK(std::fabs(accrued.count.to_double() - expected) < 1e-9);
}

TEST_CASE("two half-year steps compose to one full year") {
    const Rate tau = Rate::parse("0.02");
    Firm once = equity_firm(1000);
    std::vector<ShareLot> lots_once{{1, 1, Shares(1000), Money(100), Money()}};
    Firm twice = once;
    std::vector<ShareLot> lots_twice = lots_once;
    TaxEventLog log;
    equity_tax_step(once, lots_once, tau, Decimal(1), Decimal(1), log);
    equity_tax_step(twice, lots_twice, tau, Decimal::parse("0.5"), Decimal(1), log);
    equity_tax_step(twice, lots_twice, tau, Decimal::parse("0.5"), Decimal(1), log);
    const double rel = ((twice.irs_accrued - once.irs_accrued).count /
                        once.irs_accrued.count).to_double();
    CHECK(std::fabs(rel) < 1e-12);
    check_share_conservation(twice, lots_twice);
}

TEST_CASE("cross-owned equity-taxed lots are waived") {
    Firm firm = equity_firm(1000);
    std::vector<ShareLot> lots{{1, 1, Shares(600), Money(100), Money()},
                               {77, 1, Shares(400), Money(100), Money()}};  // holder 77 exempt
    TaxEventLog log;
    const Shares accrued =
        equity_tax_step(firm, lots, Rate::parse("0.02"), Decimal(1), Decimal(1), log,
                        [](const ShareLot& lot) { return lot.holder == 77; });
    CHECK(accrued == Shares(12));  // 2% of the 600 non-exempt shares
    CHECK(lots[1].quantity == Shares(400));
}

TEST_CASE("iceberg: the whole price or just the income, same tax") {
    const auto r = iceberg_equivalence(Money(1000), Rate::parse("0.1"), Rate::parse("0.02"));
    CHECK(r.tax_on_price == Money(20));
    CHECK(r.tax_via_income_path == Money(20));
    CHECK(r.equivalent_income_tax_rate == Rate::parse("0.2"));

    const auto r2 = iceberg_equivalence(Money(500), Rate::parse("0.05"), Rate::parse("0.01"));
    CHECK(r2.tax_on_price == Money(5));
    CHECK(r2.tax_via_income_path == Money(5));
    CHECK(r2.equivalent_income_tax_rate == Rate::parse("0.2"));

    const auto zero = iceberg_equivalence(Money(500), Rate::parse("0.05"), Rate());
    CHECK(zero.tax_on_price.value.is_zero());
    CHECK(zero.equivalent_income_tax_rate == Rate());

    CHECK_THROWS_AS(iceberg_equivalence(Money(500), Rate(), Rate::parse("0.01")), DomainError);
}

TEST_CASE("iceberg paths agree bit-exactly on random representable inputs") {
    std::mt19937_64 rng(31337);
    std::uniform_int_distribution<long long> cents(1, 10'000'000);
    std::uniform_int_distribution<int> bp(1, 9999);
    for (int k = 0; k < 1000; ++k) {
        const Money value(Decimal(cents(rng)) / Decimal(100));
        const Rate yield(Decimal(bp(rng)) / Decimal(10000));
        const Rate tax(Decimal(bp(rng)) / Decimal(10000));
        const auto r = iceberg_equivalence(value, yield, tax);
        CHECK(r.tax_on_price == r.tax_via_income_path);
    }
}

TEST_CASE("realizing a lot taxes the gain and resets the basis") {
    ShareLot lot{1, 1, Shares(100), Money(10), Money(5)};
    RegimeParams params;
    params.capgains_rate = Rate::parse("0.3");
    TaxEventLog log;
    const Money tax = realize_lot_gains(lot, Money(20), params, Decimal(1), log);
    CHECK(tax == Money(150));  // 30% of (20-15) x 100
    CHECK(lot.purchase_price_per_share == Money(20));
    CHECK(lot.reinvested_after_acquisition_per_share.value.is_zero());

    // a loss produces a symmetric credit
    const Money credit = realize_lot_gains(lot, Money(18), params, Decimal(2), log);
    CHECK(credit == Money(-60));
}
