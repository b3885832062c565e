#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "abach/marketio.hpp"
#include "abach/synth.hpp"

using namespace abach;
namespace fs = std::filesystem;

namespace {

struct TmpDir {
    fs::path path;
    TmpDir() : path(fs::current_path() / "marketio_test_tmp") {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TmpDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

}  // namespace

TEST_CASE("iso dates parse strictly and round trip") {
    const Date d = parse_date("2020-04-29");
    CHECK(format_date(d) == "2020-04-29");
    CHECK(format_date(parse_date("1999-12-31")) == "1999-12-31");
    CHECK_THROWS_AS(parse_date("2020-13-01"), ValueError);
    CHECK_THROWS_AS(parse_date("2020-02-30"), ValueError);
    CHECK_THROWS_AS(parse_date("2020-1-01"), ValueError);
    CHECK_THROWS_AS(parse_date("20200429"), ValueError);
    CHECK_THROWS_AS(parse_date("not a date"), ValueError);
}

TEST_CASE("day count is act/365 fixed") {
    const Date d1 = parse_date("2020-04-29");
    const Date d2 = parse_date("2020-06-12");
    CHECK(year_fraction(d1, d2) == doctest::Approx(44.0 / 365.0).epsilon(1e-15));
    CHECK(year_fraction(d1, d1) == 0.0);
    CHECK_THROWS_AS(year_fraction(d2, d1), NegativeInterval);
}

TEST_CASE("option chains survive the csv round trip bit for bit") {
    TmpDir tmp;
    SynthConfig cfg;
    cfg.expiry_days = {44, 167};
    cfg.sigma = {15.0, 12.1};
    cfg.strike_span = 5.0;
    const auto mkt = synth_market(cfg);

    const auto path = tmp.file("chain.csv");
    save_chain(mkt.chain, path);
    const auto back = load_chain(path);

    CHECK(back.value_date == mkt.chain.value_date);
    REQUIRE(back.expiries.size() == mkt.chain.expiries.size());
    for (size_t i = 0; i < back.expiries.size(); ++i) {
        const auto& a = mkt.chain.expiries[i];
        const auto& b = back.expiries[i];
        CHECK(b.expiry == a.expiry);
        CHECK(b.t == a.t);
        REQUIRE(b.rows.size() == a.rows.size());
        for (size_t j = 0; j < b.rows.size(); ++j) {
            CHECK(b.rows[j].strike == a.rows[j].strike);
            CHECK(b.rows[j].call_mid == a.rows[j].call_mid);
            CHECK(b.rows[j].put_mid == a.rows[j].put_mid);
        }
    }
}

TEST_CASE("one-sided quotes keep their missing side") {
    TmpDir tmp;
    MarketChain chain;
    chain.value_date = "2020-04-29";
    ChainSlice slice;
    slice.expiry = "2020-06-12";
    slice.t = 44.0 / 365.0;
    CoupleRow call_only;
    call_only.strike = 41.0;
    call_only.call_mid = 1.25;
    CoupleRow put_only;
    put_only.strike = 38.5;
    put_only.put_mid = 0.75;
    slice.rows = {put_only, call_only};
    chain.expiries.push_back(slice);

    const auto path = tmp.file("oneside.csv");
    save_chain(chain, path);
    const auto back = load_chain(path);
    REQUIRE(back.expiries.size() == 1);
    REQUIRE(back.expiries[0].rows.size() == 2);
    CHECK(back.expiries[0].rows[0].has_put());
    CHECK_FALSE(back.expiries[0].rows[0].has_call());
    CHECK(back.expiries[0].rows[1].has_call());
    CHECK_FALSE(back.expiries[0].rows[1].has_put());
}

TEST_CASE("chain loader reports malformed input precisely") {
    TmpDir tmp;
    const auto path = tmp.file("bad.csv");

    write_text(path, "wrong,header\n");
    CHECK_THROWS_AS(load_chain(path), SchemaError);

    write_text(path, "value_date,expiry,strike,call_mid,put_mid\n"
                     "2020-04-29,2020-06-12,40.0,1.0,1.0\n"
                     "2020-04-29,2020-06-12,41.0,,\n"
                     "2020-04-29,2020-06-12,42.0,,\n");
    try {
        load_chain(path);
        FAIL("quoteless rows must be rejected");
    } catch (const ValueError& e) {
        // both offending rows listed by number
        CHECK(std::string(e.what()).find("3") != std::string::npos);
        CHECK(std::string(e.what()).find("4") != std::string::npos);
    }

    write_text(path, "value_date,expiry,strike,call_mid,put_mid\n"
                     "2020-04-29,2020-04-01,40.0,1.0,1.0\n");
    CHECK_THROWS_AS(load_chain(path), ValueError);  // expiry before value date

    write_text(path, "value_date,expiry,strike,call_mid,put_mid\n"
                     "2020-04-29,2020-06-12,40.0,1.0,1.0\n"
                     "2020-04-30,2020-06-12,41.0,1.0,1.0\n");
    CHECK_THROWS_AS(load_chain(path), ValueError);  // two value dates in one file

    CHECK_THROWS_AS(load_chain(tmp.file("missing.csv")), IoError);
}

TEST_CASE("expiries come back sorted even if the file is shuffled") {
    TmpDir tmp;
    const auto path = tmp.file("shuffled.csv");
    write_text(path, "value_date,expiry,strike,call_mid,put_mid\n"
                     "2020-04-29,2020-10-15,40.0,2.5,2.5\n"
                     "2020-04-29,2020-06-12,40.0,1.5,1.5\n"
                     "2020-04-29,2020-06-12,39.0,1.2,1.9\n");
    const auto chain = load_chain(path);
    REQUIRE(chain.expiries.size() == 2);
    CHECK(chain.expiries[0].expiry == "2020-06-12");
    CHECK(chain.expiries[1].expiry == "2020-10-15");
    CHECK(chain.expiries[0].rows[0].strike == 39.0);
    CHECK(chain.expiries[0].rows[1].strike == 40.0);
}

TEST_CASE("ois curves round trip against the value date") {
    TmpDir tmp;
    const Date vd = parse_date("2020-04-29");
    const OisCurve curve({44.0 / 365.0, 350.0 / 365.0}, {0.011, 0.0135});
    const auto path = tmp.file("ois.csv");
    save_ois(curve, vd, path);
    const auto back = load_ois(path, vd);
    REQUIRE(back.times().size() == 2);
    CHECK(back.times()[0] == doctest::Approx(curve.times()[0]).epsilon(1e-15));
    CHECK(back.rates()[0] == curve.rates()[0]);
    CHECK(back.rates()[1] == curve.rates()[1]);
    CHECK(back.zero_rate(0.0) == 0.011);               // flat below the first pillar
    CHECK(back.zero_rate(5.0) == 0.0135);              // flat beyond the last
    CHECK(back.zero_rate(197.0 / 365.0) ==
          doctest::Approx(0.5 * (0.011 + 0.0135)).epsilon(1e-12));
}

namespace {

CalibrationResult sample_result() {
    CalibrationResult r;
    r.value_date = "2020-04-29";
    r.eta = -0.6;
    r.k = 1.1;
    r.alpha = 0.5;
    r.i0 = 1.0482;
    r.objective = 1.2e-14;
    r.sigma_times = {44.0 / 365.0, 350.0 / 365.0};
    r.sigma_values = {15.0, 10.6};
    ExpiryReport e;
    e.expiry = "2020-06-12";
    e.t = 44.0 / 365.0;
    e.df.expiry = e.expiry;
    e.df.t = e.t;
    e.df.B0 = 0.9987;
    e.df.F0 = 40.0;
    e.df.couples = 141;
    e.df.max_parity_residual = 3.2e-13;
    e.df.spread_bps = 0.004;
    e.df.usable = true;
    e.df.status = "ok";
    e.sigma_atm = 15.7;
    e.sigma_model = 15.0;
    e.quotes_used = 96;
    e.mse = std::nan("");  // survives as null
    e.included = true;
    e.status = "ok";
    r.expiries = {e};
    r.trace.evaluations = 867;
    r.trace.iterations = 112;
    r.trace.converged = true;
    r.trace.at_bound = false;
    r.trace.starts.push_back({-0.6, 1.1, 1.2e-14});
    return r;
}

}  // namespace

TEST_CASE("calibration results round trip through canonical json") {
    TmpDir tmp;
    const auto r = sample_result();
    const std::string text = result_to_json(r);
    CHECK(text == result_to_json(r));  // canonical form is deterministic

    const auto path = tmp.file("result.json");
    save_result(r, path);
    const auto back = load_result(path);
    CHECK(back.value_date == r.value_date);
    CHECK(back.eta == r.eta);
    CHECK(back.k == r.k);
    CHECK(back.alpha == r.alpha);
    CHECK(back.i0 == r.i0);
    CHECK(back.objective == r.objective);
    CHECK(back.sigma_times == r.sigma_times);
    CHECK(back.sigma_values == r.sigma_values);
    REQUIRE(back.expiries.size() == 1);
    CHECK(back.expiries[0].df.B0 == r.expiries[0].df.B0);
    CHECK(back.expiries[0].df.couples == r.expiries[0].df.couples);
    CHECK(std::isnan(back.expiries[0].mse));
    CHECK(back.expiries[0].included);
    CHECK(back.trace.evaluations == r.trace.evaluations);
    CHECK(back.trace.starts == r.trace.starts);
    CHECK(result_to_json(back) == text);  // full fidelity, not just field spot checks
}

TEST_CASE("schema version changes are refused loudly") {
    TmpDir tmp;
    const auto path = tmp.file("result.json");
    save_result(sample_result(), path);
    std::ifstream in(path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    const auto pos = text.find("\"schema_version\": 1");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, std::string("\"schema_version\": 1").size(), "\"schema_version\": 2");
    write_text(path, text);
    CHECK_THROWS_AS(load_result(path), SchemaVersionMismatch);

    write_text(path, "{ not json");
    CHECK_THROWS_AS(load_result(path), SchemaError);
}

TEST_CASE("archive appends once per value date and lists in order") {
    TmpDir tmp;
    ResultArchive arch((tmp.path / "results").string());

    auto r1 = sample_result();
    auto r2 = sample_result();
    r2.value_date = "2020-04-30";
    auto r0 = sample_result();
    r0.value_date = "2020-04-27";

    arch.append(r1);
    arch.append(r2);
    arch.append(r0);
    CHECK_THROWS_AS(arch.append(r1), IoError);

    const auto dates = arch.dates();
    REQUIRE(dates.size() == 3);
    CHECK(dates[0] == "2020-04-27");
    CHECK(dates[1] == "2020-04-29");
    CHECK(dates[2] == "2020-04-30");

    const auto back = arch.load("2020-04-30");
    CHECK(back.value_date == "2020-04-30");
    CHECK(back.eta == r2.eta);
    CHECK_THROWS_AS(arch.load("2019-01-01"), IoError);
}
