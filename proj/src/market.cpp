#include "flexplan/market.hpp"

#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace flexplan {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

// Accepts "YYYY-MM-DDTHH:MM[:SS]" and "YYYY-MM-DD HH:MM[:SS]".
bool parse_timestamp(const std::string& s, long long& epoch_min) {
    std::tm tm{};
    for (const char* fmt : {"%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S",
                            "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"}) {
        std::istringstream is(s);
        is >> std::get_time(&tm, fmt);
        if (!is.fail() && (is.eof() || is.peek() == EOF)) {
            tm.tm_isdst = 0;
            std::time_t t = timegm(&tm);
            if (t == -1) return false;
            epoch_min = static_cast<long long>(t) / 60;
            return true;
        }
        tm = std::tm{};
    }
    return false;
}

double parse_number(const std::string& cell, int line_no,
                    const std::string& col) {
    try {
        size_t pos = 0;
        double v = std::stod(cell, &pos);
        if (pos != cell.size() || std::isnan(v) || std::isinf(v))
            throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw PriceError("line " + std::to_string(line_no) +
                         ": malformed number in column " + col + ": '" + cell +
                         "'");
    }
}

}  // namespace

PriceSet PriceSet::slice(int begin, int count) const {
    PriceSet out;
    auto cut = [&](const auto& src, auto& dst) {
        dst.assign(src.begin() + begin, src.begin() + begin + count);
    };
    cut(timestamps, out.timestamps);
    cut(dayahead, out.dayahead);
    cut(tertiary_up, out.tertiary_up);
    cut(tertiary_down, out.tertiary_down);
    if (sell_dayahead) {
        out.sell_dayahead.emplace();
        cut(*sell_dayahead, *out.sell_dayahead);
    }
    return out;
}

PriceSet load_prices(const std::string& path, const ColumnMap& cols) {
    std::ifstream in(path);
    if (!in) throw PriceError("cannot open price file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw PriceError(path + ": empty file");
    auto header = split_csv(line);
    int c_ts = -1, c_da = -1, c_up = -1, c_dn = -1, c_sell = -1;
    for (size_t i = 0; i < header.size(); ++i) {
        std::string h = trim(header[i]);
        if (h == cols.timestamp) c_ts = static_cast<int>(i);
        else if (h == cols.dayahead) c_da = static_cast<int>(i);
        else if (h == cols.tertiary_up) c_up = static_cast<int>(i);
        else if (h == cols.tertiary_down) c_dn = static_cast<int>(i);
        else if (h == cols.sell_dayahead) c_sell = static_cast<int>(i);
    }
    if (c_ts < 0 || c_da < 0)
        throw PriceError(path + ": header must name the timestamp and " +
                         cols.dayahead + " columns");

    PriceSet ps;
    if (c_sell >= 0) ps.sell_dayahead.emplace();

    long long prev_min = 0, step_min = 0;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto cells = split_csv(line);
        if (static_cast<int>(cells.size()) <= std::max({c_ts, c_da, c_up, c_dn}))
            throw PriceError("line " + std::to_string(line_no) +
                             ": wrong number of fields");

        std::string ts = trim(cells[c_ts]);
        long long epoch;
        if (!parse_timestamp(ts, epoch))
            throw PriceError("line " + std::to_string(line_no) +
                             ": unparsable timestamp '" + ts + "'");
        if (!ps.timestamps.empty()) {
            if (epoch <= prev_min)
                throw PriceError("line " + std::to_string(line_no) +
                                 ": timestamp not strictly increasing "
                                 "(duplicate or DST fold?)");
            long long d = epoch - prev_min;
            if (step_min == 0)
                step_min = d;
            else if (d != step_min)
                throw PriceError("line " + std::to_string(line_no) +
                                 ": uneven timestamp spacing");
        }
        prev_min = epoch;
        ps.timestamps.push_back(ts);

        std::string da = trim(cells[c_da]);
        if (da.empty())
            throw PriceError("line " + std::to_string(line_no) +
                             ": day-ahead price is required");
        ps.dayahead.push_back(parse_number(da, line_no, cols.dayahead));

        auto opt_cell = [&](int ci, const std::string& name)
            -> std::optional<double> {
            if (ci < 0) return std::nullopt;
            std::string cell = trim(cells[ci]);
            if (cell.empty()) return std::nullopt;
            return parse_number(cell, line_no, name);
        };
        ps.tertiary_up.push_back(opt_cell(c_up, cols.tertiary_up));
        ps.tertiary_down.push_back(opt_cell(c_dn, cols.tertiary_down));
        if (ps.sell_dayahead) {
            auto v = opt_cell(c_sell, cols.sell_dayahead);
            if (!v)
                throw PriceError("line " + std::to_string(line_no) +
                                 ": sell price column present but empty");
            ps.sell_dayahead->push_back(*v);
        }
    }
    if (ps.dayahead.empty()) throw PriceError(path + ": no data rows");
    return ps;
}

void save_prices(const PriceSet& ps, const std::string& path,
                 const ColumnMap& cols) {
    std::ofstream out(path);
    if (!out) throw PriceError("cannot write price file: " + path);
    out << cols.timestamp << ',' << cols.dayahead << ',' << cols.tertiary_up
        << ',' << cols.tertiary_down;
    if (ps.sell_dayahead) out << ',' << cols.sell_dayahead;
    out << '\n';
    char buf[64];
    auto num = [&buf](double v) {
        std::snprintf(buf, sizeof buf, "%.12g", v);
        return std::string(buf);
    };
    for (int t = 0; t < ps.n_slots(); ++t) {
        out << ps.timestamps[t] << ',' << num(ps.dayahead[t]) << ',';
        if (ps.tertiary_up[t]) out << num(*ps.tertiary_up[t]);
        out << ',';
        if (ps.tertiary_down[t]) out << num(*ps.tertiary_down[t]);
        if (ps.sell_dayahead) out << ',' << num((*ps.sell_dayahead)[t]);
        out << '\n';
    }
}

SpreadSeries spreads(const PriceSet& ps) {
    SpreadSeries s;
    s.up.resize(ps.dayahead.size());
    s.down.resize(ps.dayahead.size());
    for (size_t t = 0; t < ps.dayahead.size(); ++t) {
        if (ps.tertiary_up[t]) s.up[t] = *ps.tertiary_up[t] - ps.dayahead[t];
        if (ps.tertiary_down[t]) s.down[t] = ps.dayahead[t] - *ps.tertiary_down[t];
    }
    return s;
}

}  // namespace flexplan
