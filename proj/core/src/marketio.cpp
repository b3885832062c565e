#include "abach/marketio.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

namespace abach {

namespace {

using nlohmann::json;

std::string num_str(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_number(const std::string& s, size_t row, const char* what) {
    try {
        size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos == s.size() && std::isfinite(v)) return v;
    } catch (const std::exception&) {
    }
    throw ValueError("row " + std::to_string(row) + ": bad " + what + " '" + s + "'");
}

Date parse_date_at(const std::string& s, size_t row) {
    try {
        return parse_date(s);
    } catch (const Error& e) {
        throw ValueError("row " + std::to_string(row) + ": " + e.what());
    }
}

std::string join(const std::vector<size_t>& rows) {
    std::string out;
    for (size_t r : rows) {
        if (!out.empty()) out += ", ";
        out += std::to_string(r);
    }
    return out;
}

}  // namespace

Date parse_date(const std::string& iso) {
    bool shaped = iso.size() == 10 && iso[4] == '-' && iso[7] == '-';
    if (shaped)
        for (size_t i : {0, 1, 2, 3, 5, 6, 8, 9})
            shaped = shaped && std::isdigit(static_cast<unsigned char>(iso[i]));
    if (!shaped) throw ValueError("expected a YYYY-MM-DD date, got '" + iso + "'");
    const int y = std::stoi(iso.substr(0, 4));
    const unsigned m = static_cast<unsigned>(std::stoi(iso.substr(5, 2)));
    const unsigned d = static_cast<unsigned>(std::stoi(iso.substr(8, 2)));
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                          std::chrono::day{d}};
    if (!ymd.ok()) throw ValueError("not a calendar date: '" + iso + "'");
    return std::chrono::sys_days{ymd};
}

std::string format_date(Date d) {
    const std::chrono::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", int(ymd.year()), unsigned(ymd.month()),
                  unsigned(ymd.day()));
    return buf;
}

double year_fraction(Date d1, Date d2) {
    const auto days = (d2 - d1).count();
    if (days < 0)
        throw NegativeInterval(format_date(d2) + " precedes " + format_date(d1));
    return static_cast<double>(days) / 365.0;
}

static const char* kChainHeader = "value_date,expiry,strike,call_mid,put_mid";
static const char* kOisHeader = "date,zero_rate";

MarketChain load_chain(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw SchemaError(path + " is empty");
    strip_cr(line);
    if (line != kChainHeader)
        throw SchemaError("chain header must be '" + std::string(kChainHeader) + "', got '" +
                          line + "'");

    Date value_date{};
    bool have_vd = false;
    std::map<Date, std::vector<CoupleRow>> slices;
    std::vector<size_t> quoteless;
    size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        strip_cr(line);
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 5)
            throw SchemaError("row " + std::to_string(row) + ": expected 5 fields, got " +
                              std::to_string(f.size()));

        const Date vd = parse_date_at(f[0], row);
        if (!have_vd) {
            value_date = vd;
            have_vd = true;
        } else if (vd != value_date) {
            throw ValueError("row " + std::to_string(row) + ": value date " + f[0] +
                             " differs from " + format_date(value_date) +
                             "; one value date per file");
        }
        const Date expiry = parse_date_at(f[1], row);
        if (expiry <= value_date)
            throw ValueError("row " + std::to_string(row) + ": expiry " + f[1] +
                             " does not follow the value date");

        CoupleRow r;
        r.strike = parse_number(f[2], row, "strike");
        if (!f[3].empty()) r.call_mid = parse_number(f[3], row, "call_mid");
        if (!f[4].empty()) r.put_mid = parse_number(f[4], row, "put_mid");
        if (!r.has_call() && !r.has_put()) {
            quoteless.push_back(row);
            continue;
        }
        slices[expiry].push_back(r);
    }
    if (!quoteless.empty())
        throw ValueError("rows quoting neither side: " + join(quoteless));
    if (!have_vd) throw ValueError("no quote rows in " + path);

    MarketChain chain;
    chain.value_date = format_date(value_date);
    for (auto& [expiry, rows] : slices) {
        std::stable_sort(rows.begin(), rows.end(),
                         [](const CoupleRow& a, const CoupleRow& b) { return a.strike < b.strike; });
        chain.expiries.push_back(
            {format_date(expiry), year_fraction(value_date, expiry), std::move(rows)});
    }
    return chain;
}

void save_chain(const MarketChain& chain, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << kChainHeader << '\n';
    for (const auto& slice : chain.expiries)
        for (const auto& r : slice.rows) {
            out << chain.value_date << ',' << slice.expiry << ',' << num_str(r.strike) << ',';
            if (r.has_call()) out << num_str(r.call_mid);
            out << ',';
            if (r.has_put()) out << num_str(r.put_mid);
            out << '\n';
        }
    if (!out) throw IoError("write failed for " + path);
}

OisCurve load_ois(const std::string& path, Date value_date) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw SchemaError(path + " is empty");
    strip_cr(line);
    if (line != kOisHeader)
        throw SchemaError("OIS header must be '" + std::string(kOisHeader) + "', got '" + line +
                          "'");

    std::vector<double> times, rates;
    size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        strip_cr(line);
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 2)
            throw SchemaError("row " + std::to_string(row) + ": expected 2 fields, got " +
                              std::to_string(f.size()));
        const Date d = parse_date_at(f[0], row);
        times.push_back(year_fraction(value_date, d));
        rates.push_back(parse_number(f[1], row, "zero_rate"));
    }
    if (times.empty()) throw ValueError("no pillars in " + path);
    return OisCurve(std::move(times), std::move(rates));
}

void save_ois(const OisCurve& curve, Date value_date, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << kOisHeader << '\n';
    for (size_t i = 0; i < curve.times().size(); ++i) {
        const auto days = std::chrono::days{std::llround(curve.times()[i] * 365.0)};
        out << format_date(value_date + days) << ',' << num_str(curve.rates()[i]) << '\n';
    }
    if (!out) throw IoError("write failed for " + path);
}

namespace {

// NaN has no JSON literal; non-finite doubles travel as null.
json jnum(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double dnum(const json& j) {
    if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
    return j.get<double>();
}

json df_to_json(const DiscountForward& df) {
    return json{{"expiry", df.expiry},
                {"t", jnum(df.t)},
                {"B0", jnum(df.B0)},
                {"F0", jnum(df.F0)},
                {"couples", df.couples},
                {"max_parity_residual", jnum(df.max_parity_residual)},
                {"spread_bps", jnum(df.spread_bps)},
                {"usable", df.usable},
                {"status", df.status}};
}

DiscountForward df_from_json(const json& j) {
    DiscountForward df;
    df.expiry = j.at("expiry").get<std::string>();
    df.t = dnum(j.at("t"));
    df.B0 = dnum(j.at("B0"));
    df.F0 = dnum(j.at("F0"));
    df.couples = j.at("couples").get<int>();
    df.max_parity_residual = dnum(j.at("max_parity_residual"));
    df.spread_bps = dnum(j.at("spread_bps"));
    df.usable = j.at("usable").get<bool>();
    df.status = j.at("status").get<std::string>();
    return df;
}

}  // namespace

std::string result_to_json(const CalibrationResult& r) {
    json j;
    j["schema_version"] = 1;
    j["value_date"] = r.value_date;
    j["eta"] = jnum(r.eta);
    j["k"] = jnum(r.k);
    j["alpha"] = jnum(r.alpha);
    j["i0"] = jnum(r.i0);
    j["objective"] = jnum(r.objective);
    j["window"] = jnum(r.window);
    j["spread_threshold_bps"] = jnum(r.spread_threshold_bps);

    json times = json::array(), values = json::array();
    for (double t : r.sigma_times) times.push_back(jnum(t));
    for (double s : r.sigma_values) values.push_back(jnum(s));
    j["sigma"] = json{{"times", times}, {"values", values}};

    json expiries = json::array();
    for (const auto& e : r.expiries)
        expiries.push_back(json{{"expiry", e.expiry},
                                {"t", jnum(e.t)},
                                {"df", df_to_json(e.df)},
                                {"sigma_atm", jnum(e.sigma_atm)},
                                {"sigma_model", jnum(e.sigma_model)},
                                {"quotes_used", e.quotes_used},
                                {"mse", jnum(e.mse)},
                                {"included", e.included},
                                {"status", e.status}});
    j["expiries"] = expiries;

    json starts = json::array();
    for (const auto& s : r.trace.starts)
        starts.push_back(json::array({jnum(s[0]), jnum(s[1]), jnum(s[2])}));
    j["trace"] = json{{"evaluations", r.trace.evaluations},
                      {"iterations", r.trace.iterations},
                      {"converged", r.trace.converged},
                      {"at_bound", r.trace.at_bound},
                      {"starts", starts}};
    return j.dump(2);
}

CalibrationResult result_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw SchemaError(std::string("malformed result JSON: ") + e.what());
    }
    try {
        const auto version = j.at("schema_version").get<int>();
        if (version != 1)
            throw SchemaVersionMismatch("result schema_version " + std::to_string(version) +
                                        ", expected 1");

        CalibrationResult r;
        r.value_date = j.at("value_date").get<std::string>();
        r.eta = dnum(j.at("eta"));
        r.k = dnum(j.at("k"));
        r.alpha = dnum(j.at("alpha"));
        r.i0 = dnum(j.at("i0"));
        r.objective = dnum(j.at("objective"));
        r.window = dnum(j.at("window"));
        r.spread_threshold_bps = dnum(j.at("spread_threshold_bps"));
        for (const auto& t : j.at("sigma").at("times")) r.sigma_times.push_back(dnum(t));
        for (const auto& s : j.at("sigma").at("values")) r.sigma_values.push_back(dnum(s));
        for (const auto& e : j.at("expiries")) {
            ExpiryReport rep;
            rep.expiry = e.at("expiry").get<std::string>();
            rep.t = dnum(e.at("t"));
            rep.df = df_from_json(e.at("df"));
            rep.sigma_atm = dnum(e.at("sigma_atm"));
            rep.sigma_model = dnum(e.at("sigma_model"));
            rep.quotes_used = e.at("quotes_used").get<int>();
            rep.mse = dnum(e.at("mse"));
            rep.included = e.at("included").get<bool>();
            rep.status = e.at("status").get<std::string>();
            r.expiries.push_back(std::move(rep));
        }
        const auto& tr = j.at("trace");
        r.trace.evaluations = tr.at("evaluations").get<int>();
        r.trace.iterations = tr.at("iterations").get<int>();
        r.trace.converged = tr.at("converged").get<bool>();
        r.trace.at_bound = tr.at("at_bound").get<bool>();
        for (const auto& s : tr.at("starts")) {
            if (!s.is_array() || s.size() != 3)
                throw SchemaError("trace.starts entries must be [eta, k, objective]");
            r.trace.starts.push_back({dnum(s[0]), dnum(s[1]), dnum(s[2])});
        }
        return r;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("result JSON: ") + e.what());
    }
}

void save_result(const CalibrationResult& r, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << result_to_json(r) << '\n';
    if (!out) throw IoError("write failed for " + path);
}

CalibrationResult load_result(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return result_from_json(buf.str());
}

ResultArchive::ResultArchive(std::string dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create archive directory " + dir_ + ": " + ec.message());
}

std::string ResultArchive::file_for(const std::string& value_date) const {
    parse_date(value_date);  // rejects anything that is not a plain ISO date
    return dir_ + "/" + value_date + ".json";
}

void ResultArchive::append(const CalibrationResult& r) {
    const std::string path = file_for(r.value_date);
    if (std::filesystem::exists(path))
        throw IoError(r.value_date + " is already archived; the archive is append-only");
    save_result(r, path);
}

CalibrationResult ResultArchive::load(const std::string& value_date) const {
    return load_result(file_for(value_date));
}

std::vector<std::string> ResultArchive::dates() const {
    std::vector<std::string> out;
    for (const auto& entry : std::filesystem::directory_iterator(dir_))
        if (entry.path().extension() == ".json") out.push_back(entry.path().stem().string());
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace abach
